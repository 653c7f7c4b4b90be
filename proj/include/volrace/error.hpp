#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace volrace {

// Base of every error raised by the library. Callers that only care about
// "something went wrong in volrace" catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class OrderingError : public Error {
public:
    using Error::Error;
};

class InsufficientDataError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

class NonStationaryError : public Error {
public:
    using Error::Error;
};

class NoSolutionError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class DegenerateSmileError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class CollinearityError : public Error {
public:
    CollinearityError(const std::string& what, std::vector<std::string> offending)
        : Error(what), offending_(std::move(offending)) {}
    [[nodiscard]] const std::vector<std::string>& offending() const noexcept { return offending_; }

private:
    std::vector<std::string> offending_;
};

// Optimizer gave up. The best parameter vector seen (natural scale) travels
// with the error so callers can inspect or report it.
class EstimationError : public Error {
public:
    EstimationError(const std::string& what, std::vector<double> best_point, double best_loglik)
        : Error(what), best_point_(std::move(best_point)), best_loglik_(best_loglik) {}
    [[nodiscard]] const std::vector<double>& best_point() const noexcept { return best_point_; }
    [[nodiscard]] double best_loglik() const noexcept { return best_loglik_; }

private:
    std::vector<double> best_point_;
    double best_loglik_;
};

}  // namespace volrace
