#pragma once

#include "volrace/time.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volrace {

enum class Frequency { Minute, Hour1, Hour3, Hour6, Hour12, Day1 };

Frequency parse_frequency(std::string_view tag);  // "1min", "1h", "3h", "6h", "12h", "1d"
std::string to_string(Frequency f);
std::chrono::minutes period_length(Frequency f);

// Crypto trades around the clock: a year is 365 days of periods.
double periods_per_year(Frequency f);

struct PriceBar {
    Timestamp timestamp;
    double close = 0.0;
    std::optional<double> volume;
};

// A gap is any spacing between consecutive bars longer than one period.
struct Gap {
    Timestamp after;
    Timestamp before;
    std::size_t missing_periods = 0;
};

struct PriceSeries {
    std::string instrument;
    Frequency frequency = Frequency::Day1;
    std::vector<PriceBar> bars;

    [[nodiscard]] std::vector<Gap> gaps() const;
    [[nodiscard]] std::vector<double> closes() const;
};

struct ReturnPoint {
    Timestamp timestamp;  // timestamp of the later bar
    double value = 0.0;
};

struct ReturnSeries {
    Frequency frequency = Frequency::Day1;
    std::vector<ReturnPoint> points;

    [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
    [[nodiscard]] std::vector<double> values() const;
};

struct DescriptiveStats {
    double mean_return = 0.0;
    double annualized_vol = 0.0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    std::size_t n = 0;
};

// CSV with header; columns `timestamp`, `close`, optional `volume`. Other
// columns are ignored.
PriceSeries load_price_csv(const std::filesystem::path& path, Frequency frequency,
                           std::string instrument = {});
PriceSeries parse_price_csv(std::istream& in, Frequency frequency, std::string instrument = {});

// Checks the series invariants (close > 0, strictly increasing timestamps).
void validate(const PriceSeries& series);

// Buckets are aligned to UTC midnight, labelled by their start, and close at
// the last source close inside [start, start + period). Empty buckets are not
// emitted.
PriceSeries resample(const PriceSeries& series, Frequency target);

ReturnSeries simple_returns(const PriceSeries& series);

// Sample standard deviation (divisor N-1) of the last `window` values.
double sample_std(std::span<const double> values);
double realized_vol(std::span<const double> returns, std::size_t window, double periods_per_year);
double realized_vol(const ReturnSeries& returns, std::size_t window, bool annualize);

DescriptiveStats descriptive_stats(const ReturnSeries& returns);

}  // namespace volrace
