#include "volrace/vol_models.hpp"

#include "volrace/error.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace volrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLog2Pi = 1.8378770664093454836;
const double kMeanAbsNormal = std::sqrt(2.0 / std::numbers::pi);
// exp() of anything larger overflows a double.
constexpr double kMaxLogVariance = 700.0;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

void require_conditional(ModelKind kind, const char* what) {
    if (!is_conditional(kind)) {
        throw UnsupportedError(fmt::format("{} is defined for ARCH, GARCH and EGARCH only, not {}", what,
                                           to_string(kind)));
    }
}

// Negative log-likelihood without allocation; +inf when the filter leaves
// the admissible region.
double negloglik(ModelKind kind, const GarchParams& p, std::span<const double> r, double init) {
    double var = init;
    long double sum = 0.0L;
    if (kind == ModelKind::Egarch) {
        double logv = std::log(init);
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (t > 0) {
                const double eps = r[t - 1] / std::sqrt(var);
                logv = p.a0 + p.alpha * (std::abs(eps) - kMeanAbsNormal) + p.theta * eps + p.beta * logv;
                if (!(std::abs(logv) < kMaxLogVariance)) return kInf;
                var = std::exp(logv);
            }
            sum += logv + r[t] * r[t] / var;
        }
    } else {
        const double beta = kind == ModelKind::Garch ? p.beta : 0.0;
        for (std::size_t t = 0; t < r.size(); ++t) {
            if (t > 0) var = p.a0 + p.alpha * r[t - 1] * r[t - 1] + beta * var;
            if (!(var > 0.0) || !std::isfinite(var)) return kInf;
            sum += std::log(var) + r[t] * r[t] / var;
        }
    }
    return static_cast<double>(0.5L * (static_cast<long double>(r.size()) * kLog2Pi + sum));
}

// Smooth maps from R^k onto each model's admissible region.
GarchParams from_unconstrained(ModelKind kind, std::span<const double> u) {
    GarchParams p;
    switch (kind) {
        case ModelKind::Arch:
            p.a0 = std::exp(u[0]);
            p.alpha = logistic(u[1]);
            break;
        case ModelKind::Garch: {
            p.a0 = std::exp(u[0]);
            const double persistence = logistic(u[1]);
            const double share = logistic(u[2]);
            p.alpha = persistence * share;
            p.beta = persistence * (1.0 - share);
            break;
        }
        case ModelKind::Egarch:
            p.a0 = u[0];
            p.alpha = u[1];
            p.theta = u[2];
            p.beta = std::tanh(u[3]);
            break;
        default:
            break;
    }
    return p;
}

std::vector<double> to_unconstrained(ModelKind kind, const GarchParams& p) {
    switch (kind) {
        case ModelKind::Arch: return {std::log(p.a0), logit(p.alpha)};
        case ModelKind::Garch: {
            const double s = p.alpha + p.beta;
            return {std::log(p.a0), logit(s), logit(p.alpha / s)};
        }
        case ModelKind::Egarch: return {p.a0, p.alpha, p.theta, std::atanh(p.beta)};
        default: return {};
    }
}

std::vector<GarchParams> starting_points(ModelKind kind, double var) {
    std::vector<GarchParams> out;
    switch (kind) {
        case ModelKind::Arch:
            for (double a : {0.1, 0.3, 0.6}) out.push_back({var * (1.0 - a), a, 0.0, 0.0});
            break;
        case ModelKind::Garch:
            // Variance targeting: a0 chosen so the unconditional variance equals the sample's.
            for (auto [a, b] : {std::pair{0.1, 0.8}, std::pair{0.05, 0.9}, std::pair{0.2, 0.6}}) {
                out.push_back({var * (1.0 - a - b), a, b, 0.0});
            }
            break;
        case ModelKind::Egarch:
            for (auto [a, b] : {std::pair{0.1, 0.8}, std::pair{0.2, 0.9}, std::pair{0.1, 0.5}}) {
                out.push_back({std::log(var) * (1.0 - b), a, b, 0.0});
            }
            break;
        default:
            break;
    }
    return out;
}

std::vector<bool> boundary_flags(ModelKind kind, const GarchParams& p) {
    constexpr double tol = 1e-6;
    switch (kind) {
        case ModelKind::Arch: return {false, p.alpha < tol || p.alpha > 1.0 - tol};
        case ModelKind::Garch: {
            const bool unit = p.alpha + p.beta > 1.0 - tol;
            return {false, p.alpha < tol || unit, p.beta < tol || unit};
        }
        case ModelKind::Egarch: return {false, false, false, std::abs(p.beta) > 1.0 - tol};
        default: return {};
    }
}

bool admissible(ModelKind kind, const GarchParams& p) {
    switch (kind) {
        case ModelKind::Arch: return p.a0 > 0.0 && p.alpha >= 0.0 && p.alpha < 1.0;
        case ModelKind::Garch: return p.a0 > 0.0 && p.alpha >= 0.0 && p.beta >= 0.0 && p.alpha + p.beta < 1.0;
        case ModelKind::Egarch: return std::abs(p.beta) < 1.0;
        default: return false;
    }
}

std::vector<double> scale_floors(ModelKind kind) {
    std::vector<double> out(parameter_count(kind), 1e-3);
    if (kind != ModelKind::Egarch) out[0] = 1e-12;
    return out;
}

std::vector<double> hessian_tstats(ModelKind kind, const GarchParams& p, std::span<const double> r, double init) {
    const auto theta = to_vector(kind, p);
    const auto k = theta.size();
    std::vector<double> steps(k);
    for (std::size_t i = 0; i < k; ++i) {
        steps[i] = 1e-4 * std::max(std::abs(theta[i]), i == 0 && kind != ModelKind::Egarch ? 1e-12 : 1e-3);
    }
    const optimize::Objective f = [&](const std::vector<double>& x) {
        return negloglik(kind, from_vector(kind, x), r, init);
    };
    const auto h = optimize::hessian(f, theta, steps);
    Eigen::MatrixXd H(k, k);
    bool finite = true;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = h[i][j];
            finite = finite && std::isfinite(h[i][j]);
        }
    }
    std::vector<double> t(k, kNaN);
    if (!finite) return t;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(H);
    if (!lu.isInvertible()) return t;
    const Eigen::MatrixXd cov = lu.inverse();
    for (std::size_t i = 0; i < k; ++i) {
        const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        if (v > 0.0) t[i] = theta[i] / std::sqrt(v);
    }
    return t;
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
    std::string n(name);
    for (auto& c : n) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (n == "HIST") return ModelKind::Hist;
    if (n == "EMA") return ModelKind::Ema;
    if (n == "ARCH") return ModelKind::Arch;
    if (n == "GARCH") return ModelKind::Garch;
    if (n == "EGARCH") return ModelKind::Egarch;
    throw UnsupportedError(fmt::format("unknown model '{}'", name));
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Hist: return "HIST";
        case ModelKind::Ema: return "EMA";
        case ModelKind::Arch: return "ARCH";
        case ModelKind::Garch: return "GARCH";
        case ModelKind::Egarch: return "EGARCH";
    }
    return "?";
}

bool is_conditional(ModelKind kind) {
    return kind == ModelKind::Arch || kind == ModelKind::Garch || kind == ModelKind::Egarch;
}

std::size_t parameter_count(ModelKind kind) {
    switch (kind) {
        case ModelKind::Arch: return 2;
        case ModelKind::Garch: return 3;
        case ModelKind::Egarch: return 4;
        default: return 0;
    }
}

std::vector<std::string> parameter_names(ModelKind kind) {
    switch (kind) {
        case ModelKind::Arch: return {"a0", "alpha"};
        case ModelKind::Garch: return {"a0", "alpha", "beta"};
        case ModelKind::Egarch: return {"a0", "alpha", "theta", "beta"};
        default: return {};
    }
}

std::vector<double> to_vector(ModelKind kind, const GarchParams& p) {
    switch (kind) {
        case ModelKind::Arch: return {p.a0, p.alpha};
        case ModelKind::Garch: return {p.a0, p.alpha, p.beta};
        case ModelKind::Egarch: return {p.a0, p.alpha, p.theta, p.beta};
        default: return {};
    }
}

GarchParams from_vector(ModelKind kind, std::span<const double> v) {
    if (v.size() != parameter_count(kind)) {
        throw Error(fmt::format("{} takes {} parameters, got {}", to_string(kind), parameter_count(kind), v.size()));
    }
    switch (kind) {
        case ModelKind::Arch: return {v[0], v[1], 0.0, 0.0};
        case ModelKind::Garch: return {v[0], v[1], v[2], 0.0};
        case ModelKind::Egarch: return {v[0], v[1], v[3], v[2]};
        default: return {};
    }
}

void check_params(ModelKind kind, const GarchParams& p) {
    require_conditional(kind, "parameter check");
    if (kind == ModelKind::Egarch) {
        if (!(std::abs(p.beta) < 1.0)) throw NonStationaryError("EGARCH requires |beta| < 1");
        return;
    }
    if (!(p.a0 > 0.0)) throw Error("a0 must be positive");
    if (p.alpha < 0.0) throw Error("alpha must be non-negative");
    if (kind == ModelKind::Garch && p.beta < 0.0) throw Error("beta must be non-negative");
}

bool is_stationary(ModelKind kind, const GarchParams& p) {
    switch (kind) {
        case ModelKind::Arch: return p.alpha < 1.0;
        case ModelKind::Garch: return p.alpha + p.beta < 1.0;
        case ModelKind::Egarch: return std::abs(p.beta) < 1.0;
        default: return true;
    }
}

double ema_decay(const EmaOptions& options) {
    const double lambda = 2.0 / (options.horizon + 1.0);
    return options.convention == EmaConvention::AsWritten ? lambda : 1.0 - lambda;
}

std::vector<double> ema_variance(std::span<const double> returns, const EmaOptions& options) {
    if (returns.empty()) throw InsufficientDataError("EMA needs at least one return");
    const double decay = ema_decay(options);
    double z2 = options.seed ? *options.seed : initial_variance(returns.first(std::min<std::size_t>(30, returns.size())));
    std::vector<double> out;
    out.reserve(returns.size());
    for (double r : returns) {
        z2 = decay * z2 + (1.0 - decay) * r * r;
        out.push_back(z2);
    }
    return out;
}

double initial_variance(std::span<const double> returns) {
    if (returns.empty()) throw InsufficientDataError("cannot seed a variance filter from an empty window");
    if (returns.size() == 1) return returns[0] * returns[0];
    const double s = sample_std(returns);
    return s * s;
}

double next_variance(ModelKind kind, const GarchParams& p, double prev_return, double prev_variance) {
    switch (kind) {
        case ModelKind::Arch: return p.a0 + p.alpha * prev_return * prev_return;
        case ModelKind::Garch: return p.a0 + p.alpha * prev_return * prev_return + p.beta * prev_variance;
        case ModelKind::Egarch: {
            const double eps = prev_return / std::sqrt(prev_variance);
            const double logv =
                p.a0 + p.alpha * (std::abs(eps) - kMeanAbsNormal) + p.theta * eps + p.beta * std::log(prev_variance);
            if (!(logv < kMaxLogVariance)) throw NumericalError("EGARCH log-variance overflow");
            return std::exp(logv);
        }
        default: throw UnsupportedError("next_variance needs a conditional model");
    }
}

std::vector<double> variance_filter(ModelKind kind, const GarchParams& p, std::span<const double> returns,
                                    std::optional<double> initial) {
    check_params(kind, p);
    if (returns.empty()) return {};
    std::vector<double> out(returns.size());
    out[0] = initial ? *initial : initial_variance(returns);
    for (std::size_t t = 1; t < returns.size(); ++t) {
        out[t] = next_variance(kind, p, returns[t - 1], out[t - 1]);
        if (!std::isfinite(out[t]) || !(out[t] > 0.0)) {
            throw NumericalError(fmt::format("non-finite conditional variance at index {}", t));
        }
    }
    return out;
}

double log_likelihood(ModelKind kind, const GarchParams& p, std::span<const double> returns,
                      std::optional<double> initial) {
    require_conditional(kind, "log-likelihood");
    if (returns.empty()) throw InsufficientDataError("log-likelihood of an empty sample");
    return -negloglik(kind, p, returns, initial ? *initial : initial_variance(returns));
}

double aic(double loglik, std::size_t k) { return 2.0 * static_cast<double>(k) - 2.0 * loglik; }

double bic(double loglik, std::size_t k, std::size_t n) {
    return static_cast<double>(k) * std::log(static_cast<double>(n)) - 2.0 * loglik;
}

FitResult fit_mle(ModelKind kind, std::span<const double> returns, const FitOptions& options) {
    require_conditional(kind, "maximum-likelihood fitting");
    if (returns.size() < std::max<std::size_t>(options.min_observations, 2)) {
        throw InsufficientDataError(fmt::format("{} fit needs at least {} returns, have {}", to_string(kind),
                                                options.min_observations, returns.size()));
    }
    const double init = initial_variance(returns);
    if (!(init > 0.0)) throw InsufficientDataError("zero sample variance: model is not identified");

    const optimize::Objective objective = [&](const std::vector<double>& u) {
        return negloglik(kind, from_unconstrained(kind, u), returns, init);
    };

    optimize::Minimum best;
    best.value = kInf;
    std::size_t evaluations = 0;
    bool any_converged = false;
    for (const auto& start : starting_points(kind, init)) {
        auto m = optimize::nelder_mead(objective, to_unconstrained(kind, start), options.optimizer);
        evaluations += m.evaluations;
        any_converged = any_converged || (m.converged && std::isfinite(m.value));
        if (m.value < best.value) best = std::move(m);
    }
    auto params = from_unconstrained(kind, best.x);
    if (any_converged && std::isfinite(best.value)) {
        // Interior optimum: finish in natural coordinates, where the logistic
        // maps no longer flatten the persistence direction.
        const auto flags = boundary_flags(kind, params);
        if (std::none_of(flags.begin(), flags.end(), [](bool b) { return b; })) {
            const optimize::Objective natural = [&](const std::vector<double>& x) {
                const auto q = from_vector(kind, x);
                if (!admissible(kind, q)) return kInf;
                return negloglik(kind, q, returns, init);
            };
            auto polished = optimize::newton_polish(natural, to_vector(kind, params), scale_floors(kind));
            evaluations += polished.evaluations;
            const auto q = from_vector(kind, polished.x);
            if (admissible(kind, q) && polished.value <= best.value + 1e-9) {
                params = q;
                best.value = std::min(best.value, polished.value);
            }
        }
    }
    if (!any_converged || !std::isfinite(best.value)) {
        throw EstimationError(fmt::format("{} likelihood maximization did not converge", to_string(kind)),
                              to_vector(kind, params), -best.value);
    }

    FitResult fit;
    fit.kind = kind;
    fit.params = params;
    fit.n = returns.size();
    fit.initial_variance = init;
    fit.loglik = -negloglik(kind, params, returns, init);
    const auto k = parameter_count(kind);
    fit.aic = aic(fit.loglik, k);
    fit.bic = bic(fit.loglik, k, fit.n);
    fit.tstats = hessian_tstats(kind, params, returns, init);
    fit.at_boundary = boundary_flags(kind, params);
    fit.evaluations = evaluations;
    return fit;
}

FitResult fit_mle(ModelKind kind, const ReturnSeries& returns, const FitOptions& options) {
    const auto values = returns.values();
    auto fit = fit_mle(kind, std::span<const double>(values), options);
    fit.window_start = returns.points.front().timestamp;
    fit.window_end = returns.points.back().timestamp;
    return fit;
}

double unconditional_variance(const GarchParams& p) {
    const double persistence = p.alpha + p.beta;
    if (!(persistence < 1.0)) {
        throw NonStationaryError(fmt::format("alpha + beta = {} is not below 1", persistence));
    }
    return p.a0 / (1.0 - persistence);
}

double unconditional_vol(const GarchParams& p, double ppy) { return std::sqrt(unconditional_variance(p) * ppy); }

double forecast_next_variance(const FitResult& fit, std::span<const double> returns) {
    require_conditional(fit.kind, "one-step forecast");
    if (returns.empty()) throw InsufficientDataError("forecast needs the estimation window");
    const auto var = variance_filter(fit.kind, fit.params, returns, fit.initial_variance);
    const double next = next_variance(fit.kind, fit.params, returns.back(), var.back());
    if (!std::isfinite(next) || !(next > 0.0)) throw NumericalError("non-finite variance forecast");
    return next;
}

double forecast_one_step(const FitResult& fit, std::span<const double> returns, double ppy) {
    return std::sqrt(forecast_next_variance(fit, returns) * ppy);
}

double multi_period_average_vol(const GarchParams& p, double next_variance, std::size_t horizon, double ppy) {
    if (horizon == 0) throw Error("multi-period forecast horizon must be positive");
    const double longrun = unconditional_variance(p);
    const double persistence = p.alpha + p.beta;
    double decay = 1.0;
    double total = 0.0;
    for (std::size_t h = 1; h <= horizon; ++h) {
        total += std::sqrt((longrun + decay * (next_variance - longrun)) * ppy);
        decay *= persistence;
    }
    return total / static_cast<double>(horizon);
}

double forecast_multi_period_average(const FitResult& fit, std::span<const double> returns, std::size_t horizon,
                                     double ppy) {
    if (fit.kind == ModelKind::Egarch) {
        throw UnsupportedError("multi-period average forecast is defined for ARCH and GARCH");
    }
    if (!is_stationary(fit.kind, fit.params)) throw NonStationaryError("multi-period forecast needs stationarity");
    return multi_period_average_vol(fit.params, forecast_next_variance(fit, returns), horizon, ppy);
}

double forecast_multi_day_average(const FitResult& fit, const ReturnSeries& returns, Date maturity) {
    if (returns.points.empty()) throw InsufficientDataError("forecast needs the estimation window");
    if (returns.frequency != Frequency::Day1) throw UnsupportedError("multi-day average expects daily returns");
    const auto last = day_of(returns.points.back().timestamp);
    const auto days = (maturity - last).count();
    if (days < 2) {
        throw Error(fmt::format("maturity {} must fall after {}", format_date(maturity),
                                format_date(last + std::chrono::days{1})));
    }
    const auto v = returns.values();
    return forecast_multi_period_average(fit, v, static_cast<std::size_t>(days), 365.0);
}

double hist_forecast(std::span<const double> returns, double ppy) {
    return realized_vol(returns, returns.size(), ppy);
}

double ema_forecast(std::span<const double> returns, const EmaOptions& options, double ppy) {
    return std::sqrt(ema_variance(returns, options).back() * ppy);
}

std::vector<double> simulate_values(ModelKind kind, const GarchParams& p, std::size_t n, std::uint64_t seed) {
    require_conditional(kind, "simulation");
    check_params(kind, p);
    if (!is_stationary(kind, p)) throw NonStationaryError("cannot simulate a non-stationary model");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double var = kind == ModelKind::Egarch ? std::exp(p.a0 / (1.0 - p.beta))
                                           : p.a0 / (1.0 - p.alpha - (kind == ModelKind::Garch ? p.beta : 0.0));
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) var = next_variance(kind, p, out.back(), var);
        out.push_back(std::sqrt(var) * normal(rng));
    }
    return out;
}

ReturnSeries simulate(ModelKind kind, const GarchParams& p, std::size_t n, std::uint64_t seed, Frequency frequency,
                      Timestamp start) {
    const auto values = simulate_values(kind, p, n, seed);
    ReturnSeries out{frequency, {}};
    out.points.reserve(n);
    const auto step = std::chrono::duration_cast<std::chrono::seconds>(period_length(frequency));
    for (std::size_t i = 0; i < n; ++i) out.points.push_back({start + step * static_cast<long>(i), values[i]});
    return out;
}

}  // namespace volrace
