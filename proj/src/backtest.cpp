#include "volrace/backtest.hpp"

#include "volrace/error.hpp"
#include "volrace/smile.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>

namespace volrace {

using namespace std::chrono;

Cents to_cents(double usd) { return static_cast<Cents>(std::llround(usd * 100.0)); }

void validate(const StrategyConfig& c) {
    if (!(c.entry_threshold > c.exit_threshold) || c.exit_threshold < 0.0) {
        throw ConfigError(fmt::format("need entry threshold > exit threshold >= 0 (got {} / {})", c.entry_threshold,
                                      c.exit_threshold));
    }
    if (!(c.rehedge_band > 0.0)) throw ConfigError("rehedge band must be positive");
    if (c.garch_refresh_hours != 24 && c.garch_refresh_hours != 12) {
        throw ConfigError(fmt::format("GARCH refresh must be 24 or 12 hours, got {}", c.garch_refresh_hours));
    }
    if (c.instrument.empty()) throw ConfigError("strategy needs an option instrument");
}

std::string to_string(Direction d) {
    switch (d) {
        case Direction::Flat: return "flat";
        case Direction::LongVol: return "long-vol";
        case Direction::ShortVol: return "short-vol";
    }
    return "?";
}

std::string to_string(Action a) {
    switch (a) {
        case Action::BuyToOpen: return "buy to open";
        case Action::SellToOpen: return "sell to open";
        case Action::BuyToClose: return "buy to close";
        case Action::SellToClose: return "sell to close";
        case Action::Rehedge: return "rehedge";
    }
    return "?";
}

TradeRecord apply_fees(TradeRecord r, const StrategyConfig& config) {
    const auto& m = config.fees;
    const double contracts = std::abs(static_cast<double>(r.option_traded));
    const double hedge = std::abs(r.hedge_traded);
    r.fee_detail = {};
    if (contracts > 0.0) {
        r.fee_detail.option_fee = to_cents(std::min(m.option_fee_rate * r.underlying_price * contracts,
                                                    m.option_fee_cap * r.option_premium * contracts));
        if (m.bid_ask) r.fee_detail.option_spread = to_cents(m.option_half_spread * r.option_premium * contracts);
    }
    if (hedge > 0.0) {
        r.fee_detail.perpetual_fee = to_cents(m.perpetual_fee_rate * hedge * r.underlying_price);
        if (m.bid_ask) r.fee_detail.perpetual_spread = to_cents(m.perpetual_half_spread_usd);
    }
    r.fees = r.fee_detail.option_fee + r.fee_detail.perpetual_fee + r.fee_detail.option_spread +
             r.fee_detail.perpetual_spread;
    r.pnl_total = r.pnl_underlying + r.pnl_option - (m.include_in_pnl ? r.fees : 0);
    return r;
}

std::pair<Position, TradeRecord> rehedge(const Position& position, double current_delta, double underlying_price) {
    Position next = position;
    TradeRecord r;
    r.action = Action::Rehedge;
    r.direction = position.direction;
    r.underlying_price = underlying_price;
    r.delta = current_delta;
    r.pnl_underlying = to_cents(position.hedge_units * (underlying_price - position.last_hedge_price));
    next.hedge_units = -static_cast<double>(position.option_units) * current_delta;
    r.hedge_traded = next.hedge_units - position.hedge_units;
    r.hedge_after = next.hedge_units;
    next.last_hedge_delta = current_delta;
    next.last_hedge_price = underlying_price;
    r.pnl_total = r.pnl_underlying;
    return {next, r};
}

PerformanceReport performance(std::span<const TradeRecord> ledger) {
    PerformanceReport rep;
    std::map<std::size_t, Cents> by_trade;
    Cents total = 0;
    for (const auto& r : ledger) {
        by_trade[r.trade_id] += r.pnl_total;
        total += r.pnl_total;
        rep.option_fees += to_usd(r.fee_detail.option_fee);
        rep.perpetual_fees += to_usd(r.fee_detail.perpetual_fee);
        rep.option_spread_cost += to_usd(r.fee_detail.option_spread);
        rep.perpetual_spread_cost += to_usd(r.fee_detail.perpetual_spread);
        rep.hedge_volume_btc += std::abs(r.hedge_traded);
    }
    Cents gross_win = 0, gross_loss = 0;
    for (const auto& [id, pnl] : by_trade) {
        rep.trade_pnls.push_back(to_usd(pnl));
        if (pnl > 0) {
            ++rep.wins;
            gross_win += pnl;
        } else if (pnl < 0) {
            gross_loss -= pnl;
        }
    }
    rep.trades = by_trade.size();
    rep.total_pnl = to_usd(total);
    if (rep.trades > 0) {
        rep.win_rate = static_cast<double>(rep.wins) / static_cast<double>(rep.trades);
        rep.pnl_per_trade = rep.total_pnl / static_cast<double>(rep.trades);
    }
    if (gross_loss > 0) rep.win_loss_ratio = static_cast<double>(gross_win) / static_cast<double>(gross_loss);
    return rep;
}

void ForecastSchedule::add(Timestamp produced_at, double vol) {
    if (!points_.empty() && produced_at <= points_.back().first) {
        throw OrderingError(fmt::format("forecast at {} is not after {}", format_timestamp(produced_at),
                                        format_timestamp(points_.back().first)));
    }
    points_.emplace_back(produced_at, vol);
}

std::optional<double> ForecastSchedule::at(Timestamp t) const {
    const auto it = std::lower_bound(points_.begin(), points_.end(), t,
                                     [](const auto& p, Timestamp x) { return p.first < x; });
    if (it == points_.begin()) return std::nullopt;
    return std::prev(it)->second;
}

GarchSchedule build_garch_schedule(const PriceSeries& underlying, const ScheduleOptions& options) {
    Frequency freq = Frequency::Day1;
    if (options.refresh_hours == 12) {
        freq = Frequency::Hour12;
    } else if (options.refresh_hours != 24) {
        throw ConfigError(fmt::format("GARCH refresh must be 24 or 12 hours, got {}", options.refresh_hours));
    }
    const auto bars = underlying.frequency == freq ? underlying : resample(underlying, freq);
    const auto rets = simple_returns(bars);
    const auto values = rets.values();
    const double ppy = periods_per_year(freq);
    const auto period = duration_cast<seconds>(period_length(freq));
    const auto expiry_at = expiry_instant(options.expiry);
    const Timestamp horizon_end{options.expiry + days{1}};

    GarchSchedule out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto label = rets.points[i].timestamp;
        if (day_of(label) < options.start) continue;
        const auto produced_at = label + period;
        if (produced_at >= expiry_at) break;
        try {
            const std::span<const double> window(values.data(), i + 1);
            const auto fit = fit_mle(ModelKind::Garch, window, options.fit);
            const double next = forecast_next_variance(fit, window);
            const auto left = horizon_end - produced_at;
            const auto horizon = static_cast<std::size_t>(std::max<long long>(1, (left + period - seconds{1}) / period));
            ScheduleRow row;
            row.produced_at = produced_at;
            row.close = bars.bars[i + 1].close;
            row.horizon = horizon;
            row.single_period = std::sqrt(next * ppy);
            row.multi_period = multi_period_average_vol(fit.params, next, horizon, ppy);
            row.adjusted = row.multi_period;
            if (options.smile_slope) {
                const double tau = year_fraction(produced_at, expiry_at);
                row.adjusted = adjusted_forecast(row.multi_period, *options.smile_slope,
                                                 smile_delta(row.close, options.traded_strike, tau),
                                                 smile_delta(row.close, row.close, tau));
            }
            out.schedule.add(produced_at, row.adjusted);
            out.rows.push_back(row);
        } catch (const Error& e) {
            out.warnings.push_back(fmt::format("{}: no forecast ({})", format_timestamp(produced_at), e.what()));
        }
    }
    return out;
}

namespace {

class Engine {
public:
    Engine(const StrategyConfig& config, const PriceSeries& underlying, BacktestResult& result)
        : config_(config), underlying_(underlying), result_(result) {}

    void on_tick(const OptionTrade& tick, double spread, double iv) {
        const double price = hedge_price(tick.timestamp, tick.underlying_price);
        const double delta =
            bs_delta({tick.underlying_price, tick.strike, time_to_expiry(tick), config_.rate, iv, tick.kind});
        const double entry = config_.entry_threshold;

        if (pos_.direction != Direction::Flat) {
            if (should_exit(spread)) {
                close(tick.timestamp, spread, tick.premium_usd, price, delta, false);
            } else if (std::abs(delta - pos_.last_hedge_delta) > config_.rehedge_band) {
                auto [next, rec] = rehedge(pos_, delta, price);
                pos_ = next;
                rec.timestamp = tick.timestamp;
                rec.trade_id = trade_id_;
                rec.spread = spread;
                rec.option_premium = tick.premium_usd;
                post(rec);
                return;
            }
        }
        if (pos_.direction == Direction::Flat && prev_spread_) {
            if (*prev_spread_ < entry && spread >= entry) {
                open(Direction::LongVol, tick, spread, price, delta);
            } else if (*prev_spread_ > -entry && spread <= -entry) {
                open(Direction::ShortVol, tick, spread, price, delta);
            }
        }
    }

    void set_prev(double spread) { prev_spread_ = spread; }

    void force_close(Timestamp at, double strike, OptionKind kind) {
        if (pos_.direction == Direction::Flat) return;
        const double price = hedge_price(at, pos_.last_hedge_price);
        const double intrinsic = std::max(kind == OptionKind::Call ? price - strike : strike - price, 0.0);
        const double delta = bs_delta({price, strike, 0.0, config_.rate, 0.0, kind});
        close(at, last_spread_, intrinsic, price, delta, true);
    }

    void remember_spread(double s) { last_spread_ = s; }

private:
    [[nodiscard]] bool should_exit(double spread) const {
        const double x = config_.exit_threshold;
        if (pos_.direction == Direction::LongVol) return x == 0.0 ? spread < 0.0 : spread <= -x;
        return x == 0.0 ? spread > 0.0 : spread >= x;
    }

    double hedge_price(Timestamp t, double fallback) {
        const auto& bars = underlying_.bars;
        const auto it = std::upper_bound(bars.begin(), bars.end(), t,
                                         [](Timestamp x, const PriceBar& b) { return x < b.timestamp; });
        if (it == bars.begin()) {
            result_.warnings.push_back(
                fmt::format("{}: no underlying bar yet, hedging at the trade's underlying price", format_timestamp(t)));
            return fallback;
        }
        return std::prev(it)->close;
    }

    void open(Direction d, const OptionTrade& tick, double spread, double price, double delta) {
        pos_ = {};
        pos_.direction = d;
        pos_.option_units = d == Direction::LongVol ? 1 : -1;
        pos_.hedge_units = -pos_.option_units * delta;
        pos_.last_hedge_delta = delta;
        pos_.last_hedge_price = price;
        pos_.entry_time = tick.timestamp;
        pos_.entry_spread = spread;
        pos_.entry_premium = tick.premium_usd;
        ++trade_id_;

        TradeRecord r;
        r.timestamp = tick.timestamp;
        r.trade_id = trade_id_;
        r.action = d == Direction::LongVol ? Action::BuyToOpen : Action::SellToOpen;
        r.direction = d;
        r.spread = spread;
        r.option_premium = tick.premium_usd;
        r.option_traded = pos_.option_units;
        r.underlying_price = price;
        r.delta = delta;
        r.hedge_traded = pos_.hedge_units;
        r.hedge_after = pos_.hedge_units;
        post(r);
    }

    void close(Timestamp at, double spread, double premium, double price, double delta, bool forced) {
        TradeRecord r;
        r.timestamp = at;
        r.trade_id = trade_id_;
        r.action = pos_.direction == Direction::LongVol ? Action::SellToClose : Action::BuyToClose;
        r.direction = pos_.direction;
        r.spread = spread;
        r.option_premium = premium;
        r.option_traded = -pos_.option_units;
        r.underlying_price = price;
        r.delta = delta;
        r.hedge_traded = -pos_.hedge_units;
        r.hedge_after = 0.0;
        r.forced = forced;
        r.pnl_option = to_cents(pos_.option_units * (premium - pos_.entry_premium));
        r.pnl_underlying = to_cents(pos_.hedge_units * (price - pos_.last_hedge_price));
        pos_ = {};
        post(r);
    }

    void post(TradeRecord r) {
        r = apply_fees(std::move(r), config_);
        cumulative_ += r.pnl_total;
        result_.pnl_curve.push_back({r.timestamp, cumulative_});
        result_.ledger.push_back(std::move(r));
    }

    const StrategyConfig& config_;
    const PriceSeries& underlying_;
    BacktestResult& result_;
    Position pos_{};
    std::optional<double> prev_spread_;
    double last_spread_ = 0.0;
    std::size_t trade_id_ = 0;
    Cents cumulative_ = 0;
};

}  // namespace

BacktestResult run_backtest(const StrategyConfig& config, std::span<const OptionTrade> ticks,
                            const PriceSeries& underlying, const ForecastSchedule& forecasts) {
    validate(config);
    BacktestResult result;
    Engine engine(config, underlying, result);
    const OptionTrade* last = nullptr;
    std::size_t no_forecast = 0;
    for (const auto& tick : ticks) {
        if (tick.instrument != config.instrument) continue;
        if (last && tick.timestamp < last->timestamp) throw OrderingError("option ticks must be sorted by time");
        if (tick.timestamp >= expiry_instant(tick.expiry)) break;
        const auto forecast = forecasts.at(tick.timestamp);
        if (!forecast) {
            if (no_forecast++ == 0) {
                result.warnings.push_back(
                    fmt::format("{}: tick before the first forecast skipped", format_timestamp(tick.timestamp)));
            }
            continue;
        }
        double iv = 0.0;
        try {
            iv = trade_implied_vol(tick, config.rate);
        } catch (const Error& e) {
            result.warnings.push_back(fmt::format("{}: tick skipped, {}", format_timestamp(tick.timestamp), e.what()));
            continue;
        }
        const double spread = vol_spread(*forecast, iv);
        engine.remember_spread(spread);
        engine.on_tick(tick, spread, iv);
        engine.set_prev(spread);
        last = &tick;
    }
    if (last) engine.force_close(expiry_instant(last->expiry), last->strike, last->kind);
    if (no_forecast > 1) result.warnings.push_back(fmt::format("{} ticks had no forecast yet", no_forecast));
    result.report = performance(result.ledger);
    return result;
}

}  // namespace volrace
