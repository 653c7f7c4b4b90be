#include "volrace/options.hpp"

#include "csv.hpp"
#include "volrace/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numbers>
#include <set>

namespace volrace {

using namespace std::chrono;

namespace {

constexpr std::array<std::string_view, 12> kMonths{"JAN", "FEB", "MAR", "APR", "MAY", "JUN",
                                                    "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};

// DDMONYY, day may be one digit.
std::optional<Date> parse_expiry_code(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == 0 || i > 2 || s.size() != i + 5) return std::nullopt;
    const unsigned d = static_cast<unsigned>(std::stoi(std::string(s.substr(0, i))));
    std::string mon(s.substr(i, 3));
    for (auto& c : mon) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    const auto it = std::find(kMonths.begin(), kMonths.end(), mon);
    if (it == kMonths.end()) return std::nullopt;
    const auto yy = s.substr(i + 3, 2);
    if (!std::isdigit(static_cast<unsigned char>(yy[0])) || !std::isdigit(static_cast<unsigned char>(yy[1]))) {
        return std::nullopt;
    }
    const year_month_day ymd{year{2000 + std::stoi(std::string(yy))},
                             month{static_cast<unsigned>(it - kMonths.begin() + 1)}, day{d}};
    if (!ymd.ok()) return std::nullopt;
    return sys_days{ymd};
}

double parse_number(std::string_view s, std::string_view what, std::string_view name) {
    if (s.empty()) throw Error(fmt::format("instrument '{}' has no {}", name, what));
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') {
            throw Error(fmt::format("instrument '{}' has a malformed {}", name, what));
        }
    }
    return std::stod(std::string(s));
}

}  // namespace

std::string to_string(OptionKind kind) { return kind == OptionKind::Call ? "call" : "put"; }

OptionKind parse_option_kind(std::string_view text) {
    const auto t = csv::lower(csv::trim(text));
    if (t == "call" || t == "c") return OptionKind::Call;
    if (t == "put" || t == "p") return OptionKind::Put;
    throw Error(fmt::format("unknown option kind '{}'", text));
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double bs_price(const BsInputs& in) {
    const double df = std::exp(-in.rate * in.tau);
    const double sign = in.kind == OptionKind::Call ? 1.0 : -1.0;
    if (in.tau <= 0.0) return std::max(sign * (in.spot - in.strike), 0.0);
    if (in.vol <= 0.0) return std::max(sign * (in.spot - in.strike * df), 0.0);
    const double sq = in.vol * std::sqrt(in.tau);
    const double d1 = (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.vol * in.vol) * in.tau) / sq;
    const double d2 = d1 - sq;
    return sign * (in.spot * norm_cdf(sign * d1) - in.strike * df * norm_cdf(sign * d2));
}

double bs_delta(const BsInputs& in) {
    const double put_shift = in.kind == OptionKind::Call ? 0.0 : -1.0;
    if (in.tau <= 0.0 || in.vol <= 0.0) {
        const double forward_strike = in.tau <= 0.0 ? in.strike : in.strike * std::exp(-in.rate * in.tau);
        double call = 0.5;
        if (in.spot > forward_strike) call = 1.0;
        if (in.spot < forward_strike) call = 0.0;
        return call + put_shift;
    }
    const double sq = in.vol * std::sqrt(in.tau);
    const double d1 = (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.vol * in.vol) * in.tau) / sq;
    return norm_cdf(d1) + put_shift;
}

double bs_vega(const BsInputs& in) {
    if (in.tau <= 0.0 || in.vol <= 0.0) return 0.0;
    const double sq = in.vol * std::sqrt(in.tau);
    const double d1 = (std::log(in.spot / in.strike) + (in.rate + 0.5 * in.vol * in.vol) * in.tau) / sq;
    return in.spot * norm_pdf(d1) * std::sqrt(in.tau);
}

double implied_vol(double premium, const BsInputs& in, const ImpliedVolOptions& options) {
    if (!(in.spot > 0.0) || !(in.strike > 0.0)) throw Error("spot and strike must be positive");
    if (!(in.tau > 0.0)) throw NoSolutionError("implied volatility is undefined at expiry");
    const double df = std::exp(-in.rate * in.tau);
    const double lower_bound = in.kind == OptionKind::Call ? std::max(in.spot - in.strike * df, 0.0)
                                                           : std::max(in.strike * df - in.spot, 0.0);
    const double upper_bound = in.kind == OptionKind::Call ? in.spot : in.strike * df;
    const double slack = 1e-12 * std::max(1.0, in.spot);
    if (!std::isfinite(premium) || premium < lower_bound - slack || premium >= upper_bound) {
        throw NoSolutionError(fmt::format("premium {} outside no-arbitrage bounds [{}, {})", premium, lower_bound,
                                          upper_bound));
    }
    BsInputs probe = in;
    auto price_at = [&](double v) {
        probe.vol = v;
        return bs_price(probe);
    };
    double lo = options.lower;
    double hi = options.upper;
    const double f_lo = price_at(lo) - premium;
    if (f_lo >= 0.0) return lo;
    if (price_at(hi) - premium < 0.0) {
        throw NoSolutionError(fmt::format("premium {} exceeds the price at vol {}", premium, hi));
    }
    double v = std::clamp(std::sqrt(2.0 * std::abs(std::log(in.spot / in.strike) + in.rate * in.tau) / in.tau), 0.2,
                          2.0);
    for (int it = 0; it < options.max_iterations; ++it) {
        const double f = price_at(v) - premium;
        if (f > 0.0) {
            hi = v;
        } else {
            lo = v;
        }
        if (hi - lo < options.tolerance) return 0.5 * (lo + hi);
        const double vega = bs_vega(probe);
        double next = vega > 0.0 ? v - f / vega : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - v) < 0.01 * options.tolerance) return next;
        v = next;
    }
    throw NumericalError(fmt::format("implied volatility did not converge for premium {}", premium));
}

double atm_strike(double vwap, double interval) {
    if (!(vwap > 0.0) || !(interval > 0.0)) throw Error("VWAP and strike interval must be positive");
    return std::floor(vwap / interval + 0.5) * interval;
}

double daily_vwap(const PriceSeries& minute_series, Date day) {
    const Timestamp from{day};
    const Timestamp to{day + days{1}};
    double num = 0.0, den = 0.0, plain = 0.0;
    std::size_t count = 0;
    bool weighted = true;
    for (const auto& b : minute_series.bars) {
        if (b.timestamp < from || b.timestamp >= to) continue;
        ++count;
        plain += b.close;
        if (!b.volume) {
            weighted = false;
            continue;
        }
        const double w = b.close * *b.volume;
        num += b.close * w;
        den += w;
    }
    if (count == 0) throw InsufficientDataError(fmt::format("no underlying bars on {}", format_date(day)));
    if (weighted && den > 0.0) return num / den;
    return plain / static_cast<double>(count);
}

ContractSpec parse_instrument_name(std::string_view name) {
    const auto n = csv::trim(name);
    if (n.find('-') != std::string_view::npos) {
        std::vector<std::string_view> parts;
        std::size_t start = 0;
        for (;;) {
            const auto pos = n.find('-', start);
            parts.push_back(n.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
        if (parts.size() != 4) throw Error(fmt::format("cannot parse instrument '{}'", name));
        const auto expiry = parse_expiry_code(parts[1]);
        if (!expiry) throw Error(fmt::format("instrument '{}' has a malformed expiry", name));
        return {parse_number(parts[2], "strike", name), parse_option_kind(parts[3]), *expiry};
    }
    if (n.size() < 4 || csv::lower(n.substr(0, 3)) != "btc") throw Error(fmt::format("cannot parse instrument '{}'", name));
    auto rest = n.substr(3);
    std::size_t i = 0;
    while (i < rest.size() && (std::isdigit(static_cast<unsigned char>(rest[i])) || rest[i] == '.')) ++i;
    const double strike = parse_number(rest.substr(0, i), "strike", name);
    if (i >= rest.size()) throw Error(fmt::format("instrument '{}' has no option kind", name));
    const auto kind = parse_option_kind(rest.substr(i, 1));
    const auto expiry = parse_expiry_code(rest.substr(i + 1));
    if (!expiry) throw Error(fmt::format("instrument '{}' has a malformed expiry", name));
    return {strike, kind, *expiry};
}

std::string instrument_name(const ContractSpec& spec) {
    const year_month_day ymd{spec.expiry};
    return fmt::format("BTC{}{}{}{}{:02d}", static_cast<long long>(std::llround(spec.strike)),
                       spec.kind == OptionKind::Call ? 'C' : 'P', static_cast<unsigned>(ymd.day()),
                       kMonths[static_cast<unsigned>(ymd.month()) - 1], static_cast<int>(ymd.year()) % 100);
}

Timestamp expiry_instant(Date expiry) { return Timestamp{expiry} + kExpiryHourUtc; }

double time_to_expiry(const OptionTrade& trade) {
    return std::max(0.0, year_fraction(trade.timestamp, expiry_instant(trade.expiry)));
}

std::vector<OptionTrade> parse_option_trades_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) throw ParseError(0, "empty option-trade file");
    const csv::Header header(line);
    const auto c_ts = header.find("timestamp");
    const auto c_inst = header.find("instrument");
    const auto c_strike = header.find("strike");
    const auto c_expiry = header.find("expiry");
    const auto c_kind = header.find("kind");
    const auto c_prem_usd = header.find("premium_usd");
    const auto c_prem_btc = header.find("premium_btc");
    const auto c_vol_usd = header.find("volume_usd");
    const auto c_amount = header.find("amount");
    const auto c_under = header.find("underlying_price");
    if (!c_ts || !c_under) throw ParseError(line_no, "option-trade header needs 'timestamp' and 'underlying_price'");
    if (!c_prem_usd && !c_prem_btc) throw ParseError(line_no, "option-trade header needs a premium column");
    if (!c_vol_usd && !c_amount) throw ParseError(line_no, "option-trade header needs 'volume_usd' or 'amount'");
    if (!c_inst && !(c_strike && c_expiry && c_kind)) {
        throw ParseError(line_no, "option-trade header needs 'instrument' or strike/expiry/kind columns");
    }

    std::vector<OptionTrade> out;
    while (csv::next_line(in, line, line_no)) {
        const auto f = csv::split(line);
        auto field = [&](std::optional<std::size_t> col) -> std::string_view {
            if (!col) return {};
            if (*col >= f.size()) throw ParseError(line_no, "too few columns");
            return f[*col];
        };
        OptionTrade t;
        try {
            t.timestamp = parse_timestamp(field(c_ts));
            std::optional<ContractSpec> from_name;
            if (c_inst) {
                t.instrument = std::string(field(c_inst));
                if (!t.instrument.empty()) {
                    try {
                        from_name = parse_instrument_name(t.instrument);
                    } catch (const Error&) {
                        // Explicit columns may still describe the contract.
                    }
                }
            }
            const auto strike_text = field(c_strike);
            const auto expiry_text = field(c_expiry);
            const auto kind_text = field(c_kind);
            if (!strike_text.empty()) {
                t.strike = csv::to_double(strike_text, line_no, "strike");
            } else if (from_name) {
                t.strike = from_name->strike;
            } else {
                throw ParseError(line_no, "no strike");
            }
            if (!expiry_text.empty()) {
                t.expiry = expiry_text.size() == 10 ? parse_date(expiry_text) : day_of(parse_timestamp(expiry_text));
            } else if (from_name) {
                t.expiry = from_name->expiry;
            } else {
                throw ParseError(line_no, "no expiry");
            }
            if (!kind_text.empty()) {
                t.kind = parse_option_kind(kind_text);
            } else if (from_name) {
                t.kind = from_name->kind;
            } else {
                throw ParseError(line_no, "no option kind");
            }
            if (t.instrument.empty()) t.instrument = instrument_name({t.strike, t.kind, t.expiry});
            t.underlying_price = csv::to_double(field(c_under), line_no, "underlying_price");
            const auto usd = field(c_prem_usd);
            if (!usd.empty()) {
                t.premium_usd = csv::to_double(usd, line_no, "premium_usd");
            } else {
                t.premium_usd = csv::to_double(field(c_prem_btc), line_no, "premium_btc") * t.underlying_price;
            }
            const auto vol_text = field(c_vol_usd);
            if (!vol_text.empty()) {
                t.volume_usd = csv::to_double(vol_text, line_no, "volume_usd");
            } else {
                t.volume_usd = csv::to_double(field(c_amount), line_no, "amount") * t.premium_usd;
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
        if (t.premium_usd < 0.0) throw ParseError(line_no, "negative premium");
        if (!(t.volume_usd > 0.0)) throw ParseError(line_no, "volume_usd must be positive");
        if (!(t.strike > 0.0)) throw ParseError(line_no, "strike must be positive");
        if (!(t.underlying_price > 0.0)) throw ParseError(line_no, "underlying_price must be positive");
        if (t.expiry < day_of(t.timestamp)) throw ParseError(line_no, "trade after its option's expiry");
        out.push_back(std::move(t));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return out;
}

std::vector<OptionTrade> load_option_trades_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("cannot open option-trade file {}", path.string()));
    return parse_option_trades_csv(in);
}

double trade_implied_vol(const OptionTrade& trade, double rate) {
    const BsInputs in{trade.underlying_price, trade.strike, time_to_expiry(trade), rate, 0.0, trade.kind};
    return implied_vol(trade.premium_usd, in);
}

VolumeWeightedIv vw_implied_vol(std::span<const OptionTrade> trades, double rate) {
    if (trades.empty()) throw InsufficientDataError("volume-weighted IV needs at least one trade");
    VolumeWeightedIv out;
    double num = 0.0, den = 0.0;
    for (const auto& t : trades) {
        try {
            const double iv = trade_implied_vol(t, rate);
            num += t.volume_usd * iv;
            den += t.volume_usd;
            ++out.used;
        } catch (const Error& e) {
            out.excluded.push_back(fmt::format("{} {}: {}", format_timestamp(t.timestamp), t.instrument, e.what()));
        }
    }
    if (out.used == 0) throw NoSolutionError("no trade yielded an implied volatility");
    out.iv = num / den;
    return out;
}

std::vector<DailyAtmIv> daily_atm_iv(std::span<const OptionTrade> trades, const PriceSeries& minute_underlying,
                                     Date expiry, double interval, double rate) {
    std::map<Date, std::vector<OptionTrade>> by_day;
    for (const auto& t : trades) {
        if (t.expiry == expiry) by_day[day_of(t.timestamp)].push_back(t);
    }
    std::set<Date> days_with_bars;
    for (const auto& b : minute_underlying.bars) days_with_bars.insert(day_of(b.timestamp));

    std::vector<DailyAtmIv> out;
    for (const auto day : days_with_bars) {
        const auto it = by_day.find(day);
        if (it == by_day.end()) continue;
        DailyAtmIv row;
        row.day = day;
        row.vwap = daily_vwap(minute_underlying, day);
        row.strike = atm_strike(row.vwap, interval);
        std::vector<OptionTrade> atm;
        for (const auto& t : it->second) {
            if (std::abs(t.strike - row.strike) < 1e-9) atm.push_back(t);
        }
        if (atm.empty()) continue;
        try {
            row.iv = vw_implied_vol(atm, rate);
        } catch (const NoSolutionError&) {
            continue;
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<QuarterSummary> exchange_summary(std::span<const OptionTrade> trades) {
    std::vector<QuarterSummary> out;
    if (trades.empty()) return out;
    auto quarter_index = [](Date d) {
        const year_month_day ymd{d};
        return static_cast<int>(ymd.year()) * 4 + static_cast<int>((static_cast<unsigned>(ymd.month()) - 1) / 3);
    };
    int first = quarter_index(day_of(trades.front().timestamp));
    int last = first;
    for (const auto& t : trades) {
        first = std::min(first, quarter_index(day_of(t.timestamp)));
        last = std::max(last, quarter_index(day_of(t.timestamp)));
    }
    std::vector<std::set<std::string>> contracts(static_cast<std::size_t>(last - first + 1));
    out.resize(contracts.size());
    for (int q = first; q <= last; ++q) {
        const year_month_day ymd{year{q / 4}, month{static_cast<unsigned>((q % 4) * 3 + 1)}, day{1}};
        out[static_cast<std::size_t>(q - first)].quarter = quarter_label(sys_days{ymd});
    }
    for (const auto& t : trades) {
        const auto idx = static_cast<std::size_t>(quarter_index(day_of(t.timestamp)) - first);
        contracts[idx].insert(t.instrument);
        ++out[idx].trades;
        out[idx].volume_usd += t.volume_usd;
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i].contracts = contracts[i].size();
    return out;
}

}  // namespace volrace
