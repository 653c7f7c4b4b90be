#include "volrace/smile.hpp"

#include "volrace/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace volrace {

using namespace std::chrono;

double smile_delta(double spot, double strike, double tau) {
    return bs_delta({spot, strike, tau, kSmileRate, kSmileVol, OptionKind::Call});
}

void check_observation(const SmileObservation& obs) {
    if (!(obs.delta_lower > obs.delta_center && obs.delta_center > obs.delta_upper)) {
        throw DegenerateSmileError(fmt::format("smile deltas on {} are not strictly decreasing in strike ({}, {}, {})",
                                               format_date(obs.date), obs.delta_lower, obs.delta_center,
                                               obs.delta_upper));
    }
}

double slope_on_date(const SmileObservation& obs) {
    const double gap_lower = std::abs(obs.delta_lower - obs.delta_center);
    const double gap_upper = std::abs(obs.delta_center - obs.delta_upper);
    if (gap_lower == 0.0 || gap_upper == 0.0) {
        throw DegenerateSmileError(fmt::format("zero delta gap in the smile on {}", format_date(obs.date)));
    }
    return ((obs.iv_lower - obs.iv_center) / gap_lower + (obs.iv_upper - obs.iv_center) / gap_upper) / 2.0;
}

double average_slope(std::span<const SmileObservation> observations) {
    if (observations.empty()) throw InsufficientDataError("average smile slope needs at least one observation");
    double total = 0.0;
    for (const auto& o : observations) total += slope_on_date(o);
    return total / static_cast<double>(observations.size());
}

double adjusted_forecast(double garch_vol, double s_avg, double delta_strike, double delta_close) {
    return garch_vol + s_avg * std::abs(delta_strike - delta_close);
}

std::vector<Date> default_calibration_dates() {
    return {sys_days{year{2019} / 11 / 1}, sys_days{year{2019} / 12 / 6}, sys_days{year{2020} / 1 / 7},
            sys_days{year{2020} / 2 / 4}, sys_days{year{2020} / 3 / 5}};
}

SmileCalibration calibrate_smile(std::span<const OptionTrade> trades, const PriceSeries& daily_closes,
                                 std::span<const Date> dates, Date expiry) {
    SmileCalibration out;
    for (const auto date : dates) {
        const auto bar = std::find_if(daily_closes.bars.begin(), daily_closes.bars.end(),
                                      [&](const PriceBar& b) { return day_of(b.timestamp) == date; });
        if (bar == daily_closes.bars.end()) {
            out.skipped.push_back(fmt::format("{}: no daily close", format_date(date)));
            continue;
        }
        const double close = bar->close;
        const double center = atm_strike(close, kSmileStrikeStep);
        const double tau = year_fraction(Timestamp{date + days{1}}, expiry_instant(expiry));
        SmileObservation obs;
        obs.date = date;
        obs.center_strike = center;

        std::string missing;
        auto iv_at = [&](double strike) -> std::optional<double> {
            std::vector<OptionTrade> pool;
            for (const auto& t : trades) {
                if (t.kind == OptionKind::Call && t.expiry == expiry && day_of(t.timestamp) == date &&
                    std::abs(t.strike - strike) < 1e-9) {
                    pool.push_back(t);
                }
            }
            if (pool.empty()) {
                missing += fmt::format(" {}", strike);
                return std::nullopt;
            }
            try {
                return vw_implied_vol(pool).iv;
            } catch (const Error&) {
                missing += fmt::format(" {}", strike);
                return std::nullopt;
            }
        };
        const auto lower = iv_at(center - kSmileStrikeStep);
        const auto mid = iv_at(center);
        const auto upper = iv_at(center + kSmileStrikeStep);
        if (!lower || !mid || !upper) {
            out.skipped.push_back(fmt::format("{}: no usable call trades at strike(s){}", format_date(date), missing));
            continue;
        }
        obs.iv_lower = *lower;
        obs.iv_center = *mid;
        obs.iv_upper = *upper;
        obs.delta_lower = smile_delta(close, center - kSmileStrikeStep, tau);
        obs.delta_center = smile_delta(close, center, tau);
        obs.delta_upper = smile_delta(close, center + kSmileStrikeStep, tau);
        try {
            check_observation(obs);
            out.slopes.push_back(slope_on_date(obs));
        } catch (const DegenerateSmileError& e) {
            out.skipped.push_back(e.what());
            continue;
        }
        out.observations.push_back(obs);
    }
    out.s_avg = average_slope(out.observations);
    return out;
}

}  // namespace volrace
