#pragma once

#include "volrace/market_data.hpp"
#include "volrace/options.hpp"

#include <span>
#include <string>
#include <vector>

namespace volrace {

// Fixed pricing assumptions for every delta in the smile adjustment,
// independent of any fitted model.
inline constexpr double kSmileRate = 0.05;
inline constexpr double kSmileVol = 0.70;
inline constexpr double kSmileStrikeStep = 1000.0;

// Call delta under the fixed smile assumptions.
double smile_delta(double spot, double strike, double tau);

struct SmileObservation {
    Date date;
    double center_strike = 0.0;
    double iv_lower = 0.0;   // strike - 1000
    double iv_center = 0.0;
    double iv_upper = 0.0;   // strike + 1000
    double delta_lower = 0.0;
    double delta_center = 0.0;
    double delta_upper = 0.0;
};

// Throws DegenerateSmileError if the call deltas are not strictly decreasing
// in strike.
void check_observation(const SmileObservation& obs);

// Mean of the two wing slopes, each in vol per unit of delta.
double slope_on_date(const SmileObservation& obs);
double average_slope(std::span<const SmileObservation> observations);

double adjusted_forecast(double garch_vol, double s_avg, double delta_strike, double delta_close);

std::vector<Date> default_calibration_dates();

struct SmileCalibration {
    std::vector<SmileObservation> observations;
    std::vector<double> slopes;
    std::vector<std::string> skipped;  // one reason per skipped date
    double s_avg = 0.0;
};

// For each date: centre strike nearest the day's close, IVs from the day's
// call trades at the three strikes for `expiry`, deltas from the fixed
// assumptions with tau measured from the day's close to expiry.
SmileCalibration calibrate_smile(std::span<const OptionTrade> trades, const PriceSeries& daily_closes,
                                 std::span<const Date> dates, Date expiry);

}  // namespace volrace
