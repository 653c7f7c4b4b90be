#pragma once

// CSV and JSON writers for every report the toolkit produces. Money columns
// use two decimals; other numbers use enough digits to round-trip.

#include "volrace/backtest.hpp"
#include "volrace/forecast_eval.hpp"
#include "volrace/market_data.hpp"
#include "volrace/options.hpp"
#include "volrace/smile.hpp"
#include "volrace/vol_models.hpp"

#include <filesystem>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace volrace::io {

std::string money(double usd);
std::string money(Cents cents);
std::string number(double x);  // "nan" for NaN, shortest round-trip text otherwise

struct StatsRow {
    Frequency frequency;
    DescriptiveStats stats;
};
void write_stats_csv(std::ostream& out, std::span<const StatsRow> rows);

// Long format: one row per parameter, then loglik/aic/bic/n/unconditional vol.
void write_fit_csv(std::ostream& out, std::span<const FitResult> fits, double ppy = 365.0);
std::string fits_json(std::span<const FitResult> fits, double ppy = 365.0);

void write_forecasts_csv(std::ostream& out, std::span<const ForecastSeries> series);

// mean, min, 5/10/25/50/75/90/95th percentiles and max of each series.
void write_forecast_distribution_csv(std::ostream& out, std::span<const ForecastSeries> series);
std::vector<double> percentiles(std::vector<double> values, std::span<const double> probs);

struct EvaluationRow {
    std::string label;  // e.g. "GARCH 365d"
    RegressionResult regression;
};
void write_evaluation_csv(std::ostream& out, std::span<const EvaluationRow> rows);
std::string evaluation_json(std::span<const EvaluationRow> rows);

// Two-column plot data.
void write_xy_csv(std::ostream& out, const std::string& x_name, const std::string& y_name,
                  std::span<const std::pair<std::string, double>> points);

void write_exchange_summary_csv(std::ostream& out, std::span<const QuarterSummary> rows);
void write_daily_iv_csv(std::ostream& out, std::span<const DailyAtmIv> rows);
void write_smile_csv(std::ostream& out, const SmileCalibration& calibration);
void write_schedule_csv(std::ostream& out, std::span<const ScheduleRow> rows);

// One row per ledger event.
void write_ledger_csv(std::ostream& out, std::span<const TradeRecord> ledger);

// One row per round trip: entry/exit spreads, direction, premiums and PNL split.
void write_trade_log_csv(std::ostream& out, std::span<const TradeRecord> ledger);

struct PerformanceRow {
    int refresh_hours = 24;
    double entry_threshold = 0.0;
    double exit_threshold = 0.0;
    bool smile_adjust = false;
    PerformanceReport report;
};
void write_performance_csv(std::ostream& out, std::span<const PerformanceRow> rows);

void write_pnl_curve_csv(std::ostream& out, std::span<const PnlPoint> curve);

void write_returns_csv(std::ostream& out, const ReturnSeries& returns);

// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

}  // namespace volrace::io
