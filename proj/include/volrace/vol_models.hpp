#pragma once

#include "volrace/market_data.hpp"
#include "volrace/optimize.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volrace {

// ARCH(1), GARCH(1,1) and EGARCH(1,1,1); orders are fixed.
enum class ModelKind { Hist, Ema, Arch, Garch, Egarch };

ModelKind parse_model_kind(std::string_view name);
std::string to_string(ModelKind kind);
bool is_conditional(ModelKind kind);  // ARCH, GARCH or EGARCH

// For EGARCH, a0 is the log-variance intercept and may be negative.
struct GarchParams {
    double a0 = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double theta = 0.0;
};

std::size_t parameter_count(ModelKind kind);
std::vector<std::string> parameter_names(ModelKind kind);
std::vector<double> to_vector(ModelKind kind, const GarchParams& p);
GarchParams from_vector(ModelKind kind, std::span<const double> v);

// Throws volrace::Error if the parameters violate the model's constraints.
void check_params(ModelKind kind, const GarchParams& p);
bool is_stationary(ModelKind kind, const GarchParams& p);

// ---- EMA ---------------------------------------------------------------

enum class EmaConvention {
    AsWritten,     // z_t^2 = lambda z_{t-1}^2 + (1 - lambda) r_t^2, lambda = 2/(n+1)
    Conventional,  // decay 1 - 2/(n+1) on the previous estimate
};

struct EmaOptions {
    double horizon = 365.0;
    EmaConvention convention = EmaConvention::AsWritten;
    std::optional<double> seed;  // default: sample variance of the first min(30, len) returns
};

// Weight on the previous estimate.
double ema_decay(const EmaOptions& options);
std::vector<double> ema_variance(std::span<const double> returns, const EmaOptions& options = {});

// ---- conditional variance filters -------------------------------------

// Sample variance (divisor n-1) used to seed every filter on a window. A
// single observation falls back to its square.
double initial_variance(std::span<const double> returns);

// One application of the recursion: variance for period t from period t-1.
double next_variance(ModelKind kind, const GarchParams& p, double prev_return, double prev_variance);

// out[0] = initial variance, out[t] = next_variance(r[t-1], out[t-1]).
std::vector<double> variance_filter(ModelKind kind, const GarchParams& p, std::span<const double> returns,
                                    std::optional<double> initial = std::nullopt);

// Gaussian log-likelihood of zero-mean returns under the filter.
double log_likelihood(ModelKind kind, const GarchParams& p, std::span<const double> returns,
                      std::optional<double> initial = std::nullopt);

// ---- estimation --------------------------------------------------------

struct FitOptions {
    std::size_t min_observations = 30;
    optimize::NelderMeadOptions optimizer{};
};

struct FitResult {
    ModelKind kind = ModelKind::Garch;
    GarchParams params;
    std::vector<double> tstats;      // per parameter, NaN where undefined
    std::vector<bool> at_boundary;   // parameter pinned to a constraint edge
    double loglik = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    std::size_t n = 0;
    double initial_variance = 0.0;
    std::optional<Timestamp> window_start;
    std::optional<Timestamp> window_end;
    std::size_t evaluations = 0;
};

double aic(double loglik, std::size_t k);
double bic(double loglik, std::size_t k, std::size_t n);

FitResult fit_mle(ModelKind kind, std::span<const double> returns, const FitOptions& options = {});
FitResult fit_mle(ModelKind kind, const ReturnSeries& returns, const FitOptions& options = {});

// ---- forecasts ---------------------------------------------------------

// a0 / (1 - alpha - beta); ARCH and GARCH only.
double unconditional_variance(const GarchParams& p);
double unconditional_vol(const GarchParams& p, double ppy = 365.0);

// Conditional variance for the period after the last return in `returns`,
// which must be the window the fit was estimated on.
double forecast_next_variance(const FitResult& fit, std::span<const double> returns);
double forecast_one_step(const FitResult& fit, std::span<const double> returns, double ppy = 365.0);

// Equal-weighted mean of the annualized vol forecasts for the next `horizon`
// periods, iterating E[z^2_{t+h}] toward the unconditional variance.
double multi_period_average_vol(const GarchParams& p, double next_variance, std::size_t horizon,
                                double ppy = 365.0);
double forecast_multi_period_average(const FitResult& fit, std::span<const double> returns, std::size_t horizon,
                                     double ppy = 365.0);
// Daily series; horizon is the number of days from the last return's date to
// `maturity`, which must be at least 2.
double forecast_multi_day_average(const FitResult& fit, const ReturnSeries& returns, Date maturity);

double hist_forecast(std::span<const double> returns, double ppy = 365.0);
double ema_forecast(std::span<const double> returns, const EmaOptions& options = {}, double ppy = 365.0);

// ---- simulation --------------------------------------------------------

std::vector<double> simulate_values(ModelKind kind, const GarchParams& p, std::size_t n, std::uint64_t seed);
// Returns stamped one period apart starting at `start`.
ReturnSeries simulate(ModelKind kind, const GarchParams& p, std::size_t n, std::uint64_t seed,
                      Frequency frequency = Frequency::Day1, Timestamp start = Timestamp{});

}  // namespace volrace
