#pragma once

#include "volrace/market_data.hpp"
#include "volrace/options.hpp"
#include "volrace/vol_models.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace volrace {

// Ledger money is kept in integer US cents.
using Cents = std::int64_t;
Cents to_cents(double usd);
inline double to_usd(Cents c) { return static_cast<double>(c) / 100.0; }

// Taker fees and half bid-ask spreads, all per fill.
struct FeeModel {
    double option_fee_rate = 0.0004;      // fraction of underlying per contract
    double option_fee_cap = 0.125;        // fraction of premium
    double perpetual_fee_rate = 0.00075;  // fraction of hedge notional
    double option_half_spread = 0.015;    // fraction of premium
    double perpetual_half_spread_usd = 0.25;
    bool bid_ask = false;         // charge half-spreads as well
    bool include_in_pnl = false;  // deduct costs from pnl_total
};

struct StrategyConfig {
    double entry_threshold = 0.05;
    double exit_threshold = 0.0;
    double rehedge_band = 0.02;
    int garch_refresh_hours = 24;
    std::string instrument;
    FeeModel fees{};
    bool smile_adjust = false;
    double rate = kRiskFreeRate;
};

void validate(const StrategyConfig& config);

// Spread between the model forecast and the option's implied vol.
inline double vol_spread(double forecast, double iv) { return forecast - iv; }

enum class Direction { Flat, LongVol, ShortVol };
enum class Action { BuyToOpen, SellToOpen, BuyToClose, SellToClose, Rehedge };

std::string to_string(Direction d);
std::string to_string(Action a);  // "buy to open", ...

struct Position {
    Direction direction = Direction::Flat;
    int option_units = 0;       // +1 long call, -1 short call
    double hedge_units = 0.0;   // BTC perpetual, signed
    double last_hedge_delta = 0.0;
    double last_hedge_price = 0.0;
    Timestamp entry_time{};
    double entry_spread = 0.0;
    double entry_premium = 0.0;

    [[nodiscard]] double net_delta(double option_delta) const { return option_units * option_delta + hedge_units; }
};

struct FeeBreakdown {
    Cents option_fee = 0;
    Cents perpetual_fee = 0;
    Cents option_spread = 0;
    Cents perpetual_spread = 0;
};

struct TradeRecord {
    Timestamp timestamp{};
    std::size_t trade_id = 0;  // round trip this event belongs to, from 1
    Action action = Action::Rehedge;
    Direction direction = Direction::Flat;  // of the round trip
    double spread = 0.0;
    double option_premium = 0.0;
    int option_traded = 0;     // contracts bought (+) or sold (-)
    double underlying_price = 0.0;
    double delta = 0.0;
    double hedge_traded = 0.0;  // BTC bought (+) or sold (-)
    double hedge_after = 0.0;
    bool forced = false;        // closed at expiry
    Cents pnl_option = 0;
    Cents pnl_underlying = 0;
    FeeBreakdown fee_detail{};
    Cents fees = 0;
    Cents pnl_total = 0;
};

// Prices a record's costs and refreshes fees and pnl_total.
TradeRecord apply_fees(TradeRecord record, const StrategyConfig& config);

// Re-centres the hedge on `current_delta`, realizing the perpetual PNL since
// the last hedge. Precondition: |current_delta - last_hedge_delta| > band.
std::pair<Position, TradeRecord> rehedge(const Position& position, double current_delta, double underlying_price);

struct PerformanceReport {
    std::size_t trades = 0;
    std::size_t wins = 0;
    std::optional<double> win_loss_ratio;  // empty when there are no losses
    double win_rate = 0.0;
    double total_pnl = 0.0;
    double pnl_per_trade = 0.0;
    double option_fees = 0.0;
    double perpetual_fees = 0.0;
    double option_spread_cost = 0.0;
    double perpetual_spread_cost = 0.0;
    double hedge_volume_btc = 0.0;
    std::vector<double> trade_pnls;
};

PerformanceReport performance(std::span<const TradeRecord> ledger);

// Dated forecasts; the value in force at time t is the latest one produced
// strictly before t.
class ForecastSchedule {
public:
    void add(Timestamp produced_at, double vol);
    [[nodiscard]] std::optional<double> at(Timestamp t) const;
    [[nodiscard]] const std::vector<std::pair<Timestamp, double>>& points() const noexcept { return points_; }

private:
    std::vector<std::pair<Timestamp, double>> points_;
};

struct ScheduleOptions {
    Date start;                      // first origin day
    Date expiry;
    int refresh_hours = 24;          // 24 or 12
    double traded_strike = 0.0;      // used by the smile adjustment
    std::optional<double> smile_slope;  // set to adjust for moneyness
    FitOptions fit{};
};

struct ScheduleRow {
    Timestamp produced_at{};
    double close = 0.0;
    double single_period = 0.0;
    double multi_period = 0.0;
    double adjusted = 0.0;  // equals multi_period without the smile adjustment
    std::size_t horizon = 0;
};

struct GarchSchedule {
    ForecastSchedule schedule;
    std::vector<ScheduleRow> rows;
    std::vector<std::string> warnings;
};

// Whole-history GARCH refit at every refresh boundary from `start`, emitting the
// multi-period average forecast to the option's expiry.
GarchSchedule build_garch_schedule(const PriceSeries& underlying, const ScheduleOptions& options);

struct PnlPoint {
    Timestamp timestamp{};
    Cents cumulative = 0;
};

struct BacktestResult {
    std::vector<TradeRecord> ledger;
    PerformanceReport report;
    std::vector<PnlPoint> pnl_curve;
    std::vector<std::string> warnings;
};

// Event loop over the ticks of config.instrument. `underlying` supplies hedge
// fill prices (latest close at or before each tick).
BacktestResult run_backtest(const StrategyConfig& config, std::span<const OptionTrade> ticks,
                            const PriceSeries& underlying, const ForecastSchedule& forecasts);

}  // namespace volrace
