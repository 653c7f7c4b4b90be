#pragma once

#include "volrace/market_data.hpp"
#include "volrace/vol_models.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volrace {

// Trailing estimation window. An empty day count means the whole history.
struct LookbackSpec {
    std::optional<std::size_t> days;

    static LookbackSpec whole() { return {}; }
    static LookbackSpec trailing(std::size_t n);  // n >= 30
    [[nodiscard]] bool is_whole() const noexcept { return !days.has_value(); }
};

LookbackSpec parse_lookback(std::string_view text);  // "whole", "365d", "180", ...
std::string to_string(const LookbackSpec& lookback);

struct ForecastPoint {
    Date origin;                // last day of data used
    Date target;                // origin + 1 day
    std::optional<double> vol;  // annualized; empty when estimation failed
    std::string note;           // failure reason when vol is empty
};

struct ForecastSeries {
    ModelKind kind = ModelKind::Garch;
    LookbackSpec lookback;
    std::vector<ForecastPoint> entries;

    [[nodiscard]] std::size_t missing() const;
};

struct WalkForwardOptions {
    FitOptions fit{};
    EmaOptions ema{};
};

// One forecast per daily return dated on or after `start`; each uses only the
// returns dated up to and including its origin.
ForecastSeries walk_forward(ModelKind kind, const LookbackSpec& lookback, const ReturnSeries& daily, Date start,
                            const WalkForwardOptions& options = {});

// Forecast from a single window of daily returns (the last element is day t).
double forecast_from_window(ModelKind kind, std::span<const double> window, const WalkForwardOptions& options = {});

// Sample std of the minute returns between consecutive bars inside `day`,
// annualized with sqrt(525600).
double realized_vol_next_day(const PriceSeries& minute_series, Date day);

// The same quantity for every day present in the series; days with fewer than
// 30 intraday returns are left out.
std::map<Date, double> daily_realized_vols(const PriceSeries& minute_series);

// ---- predictive regression --------------------------------------------

struct DatedValue {
    Date date;
    double value = 0.0;
};

struct NamedSeries {
    std::string name;
    std::vector<DatedValue> values;
};

NamedSeries to_named_series(const ForecastSeries& forecasts, std::string name);  // keyed by target date

struct AlignedTable {
    std::vector<Date> dates;
    std::vector<double> response;
    std::vector<std::vector<double>> regressors;  // one column per regressor
    std::vector<std::string> names;
    std::size_t dropped = 0;  // dates present somewhere but not everywhere
};

// Listwise inner join on date; non-finite values count as missing.
AlignedTable align(const NamedSeries& response, std::span<const NamedSeries> regressors);

struct RegressionResult {
    std::vector<std::string> names;  // "const" followed by regressor names
    std::vector<double> coefficients;
    std::vector<double> tstats;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double mae = 0.0;
    std::size_t n = 0;
    std::size_t dropped = 0;
};

RegressionResult ols(std::span<const double> y, std::span<const std::vector<double>> columns,
                     std::span<const std::string> names);
RegressionResult ols_predict(const NamedSeries& rv, std::span<const NamedSeries> regressors);

double mae(std::span<const double> actual, std::span<const double> fitted);

}  // namespace volrace
