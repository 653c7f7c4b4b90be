#pragma once

// Deterministic synthetic market: hourly underlying bars plus call trades on a
// single contract, priced off a slowly drifting implied vol.

#include "volrace/market_data.hpp"
#include "volrace/options.hpp"
#include "volrace/vol_models.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace synthetic {

using namespace volrace;
using namespace std::chrono;

struct Market {
    PriceSeries underlying;
    std::vector<OptionTrade> ticks;
    Date first_trading_day;
    Date expiry;
    std::string instrument;
    double strike = 8000.0;
};

inline Market make_market(std::uint64_t seed, int history_days = 240, int trading_days = 40, int ticks_per_day = 8) {
    Market m;
    const Date start = sys_days{year{2019} / January / 1};
    m.first_trading_day = start + days{history_days};
    m.expiry = m.first_trading_day + days{trading_days + 1};
    m.instrument = "BTC8000C" + [&] {
        const year_month_day ymd{m.expiry};
        static const char* mon[] = {"JAN", "FEB", "MAR", "APR", "MAY", "JUN",
                                    "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};
        char buf[16];
        std::snprintf(buf, sizeof buf, "%02u%s%02d", static_cast<unsigned>(ymd.day()),
                      mon[static_cast<unsigned>(ymd.month()) - 1], static_cast<int>(ymd.year()) % 100);
        return std::string(buf);
    }();

    const auto n_hours = static_cast<std::size_t>((history_days + trading_days + 1) * 24);
    const GarchParams p{7e-7, 0.08, 0.90, 0.0};
    const auto r = simulate_values(ModelKind::Garch, p, n_hours, seed);
    m.underlying.instrument = "SYN";
    m.underlying.frequency = Frequency::Hour1;
    double price = 8000.0;
    Timestamp t{start};
    m.underlying.bars.push_back({t, price, 1.0});
    for (const double x : r) {
        t += hours{1};
        price *= 1.0 + x;
        m.underlying.bars.push_back({t, price, 1.0});
    }
    const double scale = m.strike / m.underlying.bars[static_cast<std::size_t>(history_days * 24)].close;
    for (auto& b : m.underlying.bars) b.close *= scale;

    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Timestamp expiry_at = expiry_instant(m.expiry);
    for (int d = 0; d < trading_days; ++d) {
        const Timestamp day0{m.first_trading_day + days{d}};
        std::vector<seconds> offsets;
        for (int k = 0; k < ticks_per_day; ++k) offsets.push_back(seconds{static_cast<long>(u(rng) * 86399)});
        std::sort(offsets.begin(), offsets.end());
        for (const auto off : offsets) {
            const Timestamp ts = day0 + off;
            if (ts >= expiry_at) break;
            const auto idx = static_cast<std::size_t>(duration_cast<hours>(ts - Timestamp{start}).count());
            const double spot = m.underlying.bars[idx].close;
            const double iv = 0.55 + 0.25 * std::sin(0.35 * d + 0.05 * static_cast<double>(off.count()) / 3600.0) +
                              0.03 * (u(rng) - 0.5);
            OptionTrade tr;
            tr.timestamp = ts;
            tr.instrument = m.instrument;
            tr.strike = m.strike;
            tr.expiry = m.expiry;
            tr.kind = OptionKind::Call;
            tr.underlying_price = spot;
            tr.premium_usd = bs_price({spot, m.strike, year_fraction(ts, expiry_at), kRiskFreeRate, iv,
                                       OptionKind::Call});
            tr.volume_usd = tr.premium_usd;
            m.ticks.push_back(tr);
        }
    }
    return m;
}

// One UTC day of minute bars with i.i.d. normal returns of std `s`.
inline PriceSeries minute_day(Date day, double s, std::uint64_t seed, double start_price = 8000.0) {
    PriceSeries out{"SYN", Frequency::Minute, {}};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, s);
    double price = start_price;
    for (int i = 0; i < 1440; ++i) {
        out.bars.push_back({Timestamp{day} + minutes{i}, price, 1.0});
        price *= 1.0 + z(rng);
    }
    return out;
}

}  // namespace synthetic
