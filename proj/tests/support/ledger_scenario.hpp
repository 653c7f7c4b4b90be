#pragma once

// Six option ticks on one call with a flat model forecast of 75%: one tick
// below the entry threshold, an entry, two rehedges, a tick inside the band
// and an exit. The expected ledger is computed here with its own
// Black-Scholes delta so it does not lean on the library's analytics.

#include "volrace/backtest.hpp"

#include <chrono>
#include <cmath>
#include <vector>

namespace scenario {

using namespace volrace;
using namespace std::chrono;

struct Tick {
    Timestamp at;
    double spot;
    double iv;
};

struct Expected {
    Timestamp at;
    Action action;
    double spread;
    double premium;
    int option_traded;
    double price;
    double delta;
    double hedge_traded;
    double hedge_after;
    Cents pnl_option;
    Cents pnl_underlying;
    Cents fees;
    Cents pnl_total;
};

struct Scenario {
    StrategyConfig config;
    std::vector<OptionTrade> ticks;
    PriceSeries underlying;
    ForecastSchedule forecasts;
    std::vector<Expected> expected;
};

inline constexpr double kForecast = 0.75;
inline constexpr double kStrike = 8000.0;
inline constexpr double kRate = 0.05;

inline double ncdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double tau_of(Timestamp t) {
    const Timestamp expiry = Timestamp{sys_days{year{2020} / 3 / 27}} + hours{8};
    return static_cast<double>((expiry - t).count()) / (365.0 * 86400.0);
}

inline double call_price(double s, double vol, double tau) {
    const double d1 = (std::log(s / kStrike) + (kRate + 0.5 * vol * vol) * tau) / (vol * std::sqrt(tau));
    const double d2 = d1 - vol * std::sqrt(tau);
    return s * ncdf(d1) - kStrike * std::exp(-kRate * tau) * ncdf(d2);
}

inline double call_delta(double s, double vol, double tau) {
    return ncdf((std::log(s / kStrike) + (kRate + 0.5 * vol * vol) * tau) / (vol * std::sqrt(tau)));
}

inline Cents cents(double usd) { return static_cast<Cents>(std::llround(usd * 100.0)); }

inline Scenario build() {
    Scenario sc;
    sc.config.instrument = "BTC8000C27MAR20";
    sc.config.entry_threshold = 0.05;
    sc.config.exit_threshold = 0.0;
    sc.forecasts.add(Timestamp{sys_days{year{2020} / 2 / 1}}, kForecast);

    const Timestamp d10{sys_days{year{2020} / 2 / 10}};
    const std::vector<Tick> ticks{
        {d10 + hours{10}, 8000.0, 0.72},              // spread 0.03: nothing
        {d10 + hours{11}, 8000.0, 0.69},              // 0.06: crosses, buy to open
        {d10 + hours{14}, 8300.0, 0.70},              // delta up: rehedge
        {d10 + hours{24 + 9}, 8600.0, 0.71},          // delta up again: rehedge
        {d10 + hours{24 + 12}, 8620.0, 0.72},         // inside the band
        {d10 + hours{48 + 10}, 8500.0, 0.77},         // -0.02: sell to close
    };
    sc.underlying.instrument = "BTC-PERPETUAL";
    sc.underlying.frequency = Frequency::Minute;
    for (const auto& t : ticks) {
        OptionTrade tr;
        tr.timestamp = t.at;
        tr.instrument = sc.config.instrument;
        tr.strike = kStrike;
        tr.expiry = sys_days{year{2020} / 3 / 27};
        tr.kind = OptionKind::Call;
        tr.underlying_price = t.spot;
        tr.premium_usd = call_price(t.spot, t.iv, tau_of(t.at));
        tr.volume_usd = tr.premium_usd;
        sc.ticks.push_back(tr);
        sc.underlying.bars.push_back({t.at, t.spot, 1.0});
    }

    // Hand ledger: deltas from the nominal vols, hedge PNL on the price moves
    // between hedges, option PNL on the premium change.
    auto fee = [](double premium, double price, double hedge) {
        return cents(std::min(0.0004 * price, 0.125 * premium)) +
               cents(0.00075 * std::abs(hedge) * price);
    };
    const auto& p = sc.ticks;
    const double d1 = call_delta(8000.0, 0.69, tau_of(p[1].timestamp));
    const double d2 = call_delta(8300.0, 0.70, tau_of(p[2].timestamp));
    const double d3 = call_delta(8600.0, 0.71, tau_of(p[3].timestamp));
    const double d5 = call_delta(8500.0, 0.77, tau_of(p[5].timestamp));

    Expected open{p[1].timestamp, Action::BuyToOpen, kForecast - 0.69, p[1].premium_usd, 1, 8000.0, d1, -d1, -d1,
                  0, 0, 0, 0};
    open.fees = fee(open.premium, 8000.0, d1);

    Expected h1{p[2].timestamp, Action::Rehedge, kForecast - 0.70, p[2].premium_usd, 0, 8300.0, d2, -(d2 - d1), -d2,
                0, cents(-d1 * 300.0), 0, 0};
    h1.fees = cents(0.00075 * std::abs(d2 - d1) * 8300.0);
    h1.pnl_total = h1.pnl_underlying;

    Expected h2{p[3].timestamp, Action::Rehedge, kForecast - 0.71, p[3].premium_usd, 0, 8600.0, d3, -(d3 - d2), -d3,
                0, cents(-d2 * 300.0), 0, 0};
    h2.fees = cents(0.00075 * std::abs(d3 - d2) * 8600.0);
    h2.pnl_total = h2.pnl_underlying;

    Expected close{p[5].timestamp, Action::SellToClose, kForecast - 0.77, p[5].premium_usd, -1, 8500.0, d5, d3, 0.0,
                   cents(p[5].premium_usd - p[1].premium_usd), cents(-d3 * -100.0), 0, 0};
    close.fees = fee(close.premium, 8500.0, d3);
    close.pnl_total = close.pnl_option + close.pnl_underlying;

    sc.expected = {open, h1, h2, close};
    return sc;
}

}  // namespace scenario
