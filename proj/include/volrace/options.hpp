#pragma once

#include "volrace/market_data.hpp"
#include "volrace/time.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace volrace {

inline constexpr double kRiskFreeRate = 0.05;
// Deribit options settle at 08:00 UTC on the expiry date.
inline constexpr std::chrono::hours kExpiryHourUtc{8};

enum class OptionKind { Call, Put };

std::string to_string(OptionKind kind);
OptionKind parse_option_kind(std::string_view text);  // "call"/"c"/"put"/"p"

struct BsInputs {
    double spot = 0.0;
    double strike = 0.0;
    double tau = 0.0;  // ACT/365 years
    double rate = kRiskFreeRate;
    double vol = 0.0;
    OptionKind kind = OptionKind::Call;
};

double norm_cdf(double x);
double norm_pdf(double x);

// European Black-Scholes value. tau = 0 gives intrinsic value; vol = 0 gives
// the discounted forward intrinsic value.
double bs_price(const BsInputs& in);
// N(d1) for calls, N(d1) - 1 for puts. At tau = 0 the intrinsic delta, with
// an at-the-money call at 0.5.
double bs_delta(const BsInputs& in);
double bs_vega(const BsInputs& in);

struct ImpliedVolOptions {
    double lower = 1e-4;
    double upper = 10.0;
    double tolerance = 1e-8;
    int max_iterations = 200;
};

// Safeguarded Newton inside a bisection bracket. `in.vol` is ignored.
// Throws NoSolutionError when the premium violates the no-arbitrage bounds or
// lies above the price at the upper bracket.
double implied_vol(double premium, const BsInputs& in, const ImpliedVolOptions& options = {});

// Nearest multiple of `interval`; exact midpoints round up.
double atm_strike(double vwap, double interval = 1000.0);

// Dollar-volume-weighted average close over the day's bars. Falls back to an
// equal-weighted mean when the bars carry no volume.
double daily_vwap(const PriceSeries& minute_series, Date day);

// ---- trades ------------------------------------------------------------

struct OptionTrade {
    Timestamp timestamp;
    std::string instrument;
    double strike = 0.0;
    Date expiry;
    OptionKind kind = OptionKind::Call;
    double premium_usd = 0.0;
    double volume_usd = 0.0;
    double underlying_price = 0.0;
};

struct ContractSpec {
    double strike = 0.0;
    OptionKind kind = OptionKind::Call;
    Date expiry;
};

// "BTC8000C27MAR20" or the exchange form "BTC-27MAR20-8000-C".
ContractSpec parse_instrument_name(std::string_view name);
std::string instrument_name(const ContractSpec& spec);  // compact form

Timestamp expiry_instant(Date expiry);
double time_to_expiry(const OptionTrade& trade);

// Trades come back stably sorted by timestamp.
// Columns: timestamp, instrument, strike, expiry, kind, premium_usd or
// premium_btc, volume_usd (or amount), underlying_price. Empty contract
// fields are filled in from the instrument name.
std::vector<OptionTrade> parse_option_trades_csv(std::istream& in);
std::vector<OptionTrade> load_option_trades_csv(const std::filesystem::path& path);

double trade_implied_vol(const OptionTrade& trade, double rate = kRiskFreeRate);

struct VolumeWeightedIv {
    double iv = 0.0;
    std::size_t used = 0;
    std::vector<std::string> excluded;  // one message per trade whose IV failed
};

VolumeWeightedIv vw_implied_vol(std::span<const OptionTrade> trades, double rate = kRiskFreeRate);

struct DailyAtmIv {
    Date day;
    double vwap = 0.0;
    double strike = 0.0;
    VolumeWeightedIv iv;
};

// For each day with underlying bars and at least one tradeable ATM trade:
// pick the strike nearest the day's VWAP and pool the calls and puts at that
// strike for the given expiry.
std::vector<DailyAtmIv> daily_atm_iv(std::span<const OptionTrade> trades, const PriceSeries& minute_underlying,
                                     Date expiry, double interval = 1000.0, double rate = kRiskFreeRate);

struct QuarterSummary {
    std::string quarter;
    std::size_t contracts = 0;
    std::size_t trades = 0;
    double volume_usd = 0.0;
};

// One row per calendar quarter from the first to the last trade, including
// empty quarters.
std::vector<QuarterSummary> exchange_summary(std::span<const OptionTrade> trades);

}  // namespace volrace
