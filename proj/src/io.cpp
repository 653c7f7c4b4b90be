#include "volrace/io.hpp"

#include "volrace/error.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>

namespace volrace::io {

namespace {

nlohmann::json json_number(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

}  // namespace

std::string money(double usd) { return fmt::format("{:.2f}", usd); }

std::string money(Cents cents) {
    const Cents a = cents < 0 ? -cents : cents;
    return fmt::format("{}{}.{:02d}", cents < 0 ? "-" : "", a / 100, a % 100);
}

std::string number(double x) {
    if (std::isnan(x)) return "nan";
    return fmt::format("{}", x);
}

void write_stats_csv(std::ostream& out, std::span<const StatsRow> rows) {
    out << "frequency,n,mean_return,annualized_vol,skewness,excess_kurtosis\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{},{}\n", to_string(r.frequency), r.stats.n, number(r.stats.mean_return),
                           number(r.stats.annualized_vol), number(r.stats.skewness), number(r.stats.excess_kurtosis));
    }
}

void write_fit_csv(std::ostream& out, std::span<const FitResult> fits, double ppy) {
    out << "model,field,value,tstat\n";
    for (const auto& f : fits) {
        const auto names = parameter_names(f.kind);
        const auto values = to_vector(f.kind, f.params);
        const auto model = to_string(f.kind);
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double t = i < f.tstats.size() ? f.tstats[i] : std::nan("");
            out << fmt::format("{},{},{},{}\n", model, names[i], number(values[i]), number(t));
        }
        out << fmt::format("{},loglik,{},\n", model, number(f.loglik));
        out << fmt::format("{},aic,{},\n", model, number(f.aic));
        out << fmt::format("{},bic,{},\n", model, number(f.bic));
        out << fmt::format("{},n,{},\n", model, f.n);
        if (f.kind != ModelKind::Egarch) {
            out << fmt::format("{},unconditional_vol,{},\n", model, number(unconditional_vol(f.params, ppy)));
        }
    }
}

std::string fits_json(std::span<const FitResult> fits, double ppy) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : fits) {
        nlohmann::json j;
        j["model"] = to_string(f.kind);
        const auto names = parameter_names(f.kind);
        const auto values = to_vector(f.kind, f.params);
        for (std::size_t i = 0; i < names.size(); ++i) {
            j["params"][names[i]] = json_number(values[i]);
            j["tstats"][names[i]] = json_number(i < f.tstats.size() ? f.tstats[i] : std::nan(""));
            j["at_boundary"][names[i]] = i < f.at_boundary.size() && f.at_boundary[i];
        }
        j["loglik"] = json_number(f.loglik);
        j["aic"] = json_number(f.aic);
        j["bic"] = json_number(f.bic);
        j["n"] = f.n;
        if (f.kind != ModelKind::Egarch) j["unconditional_vol"] = json_number(unconditional_vol(f.params, ppy));
        if (f.window_start) j["window_start"] = format_timestamp(*f.window_start);
        if (f.window_end) j["window_end"] = format_timestamp(*f.window_end);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

void write_forecasts_csv(std::ostream& out, std::span<const ForecastSeries> series) {
    out << "model,lookback,origin,target,forecast_vol,note\n";
    for (const auto& s : series) {
        const auto model = to_string(s.kind);
        const auto lb = to_string(s.lookback);
        for (const auto& e : s.entries) {
            out << fmt::format("{},{},{},{},{},{}\n", model, lb, format_date(e.origin), format_date(e.target),
                               e.vol ? number(*e.vol) : "", e.note);
        }
    }
}

std::vector<double> percentiles(std::vector<double> values, std::span<const double> probs) {
    if (values.empty()) throw InsufficientDataError("percentiles of an empty sample");
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    for (const double p : probs) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        out.push_back(values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]));
    }
    return out;
}

void write_forecast_distribution_csv(std::ostream& out, std::span<const ForecastSeries> series) {
    static constexpr double probs[] = {0.0, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 1.0};
    out << "model,lookback,n,mean,min,p5,p10,p25,p50,p75,p90,p95,max\n";
    for (const auto& s : series) {
        std::vector<double> v;
        for (const auto& e : s.entries) {
            if (e.vol) v.push_back(*e.vol);
        }
        out << fmt::format("{},{},{}", to_string(s.kind), to_string(s.lookback), v.size());
        if (v.empty()) {
            out << ",,,,,,,,,,\n";
            continue;
        }
        double sum = 0.0;
        for (const double x : v) sum += x;
        const auto q = percentiles(v, probs);
        out << ',' << number(sum / static_cast<double>(v.size())) << ',' << number(q[0]);
        for (std::size_t i = 1; i < q.size(); ++i) out << ',' << number(q[i]);
        out << '\n';
    }
}

void write_evaluation_csv(std::ostream& out, std::span<const EvaluationRow> rows) {
    out << "label,term,coefficient,tstat,r2,adj_r2,mae,n,dropped\n";
    for (const auto& row : rows) {
        const auto& r = row.regression;
        for (std::size_t i = 0; i < r.names.size(); ++i) {
            out << fmt::format("{},{},{},{},{},{},{},{},{}\n", row.label, r.names[i], number(r.coefficients[i]),
                               number(r.tstats[i]), number(r.r2), number(r.adj_r2), number(r.mae), r.n, r.dropped);
        }
    }
}

std::string evaluation_json(std::span<const EvaluationRow> rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
        const auto& r = row.regression;
        nlohmann::json j;
        j["label"] = row.label;
        for (std::size_t i = 0; i < r.names.size(); ++i) {
            j["terms"].push_back({{"name", r.names[i]},
                                  {"coefficient", json_number(r.coefficients[i])},
                                  {"tstat", json_number(r.tstats[i])}});
        }
        j["r2"] = json_number(r.r2);
        j["adj_r2"] = json_number(r.adj_r2);
        j["mae"] = json_number(r.mae);
        j["n"] = r.n;
        j["dropped"] = r.dropped;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

void write_xy_csv(std::ostream& out, const std::string& x_name, const std::string& y_name,
                  std::span<const std::pair<std::string, double>> points) {
    out << x_name << ',' << y_name << '\n';
    for (const auto& [x, y] : points) out << x << ',' << number(y) << '\n';
}

void write_exchange_summary_csv(std::ostream& out, std::span<const QuarterSummary> rows) {
    out << "quarter,contracts,trades,volume_usd\n";
    for (const auto& r : rows) out << fmt::format("{},{},{},{}\n", r.quarter, r.contracts, r.trades, money(r.volume_usd));
}

void write_daily_iv_csv(std::ostream& out, std::span<const DailyAtmIv> rows) {
    out << "date,vwap,strike,iv,trades_used,trades_excluded\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{},{}\n", format_date(r.day), money(r.vwap), number(r.strike),
                           number(r.iv.iv), r.iv.used, r.iv.excluded.size());
    }
}

void write_smile_csv(std::ostream& out, const SmileCalibration& c) {
    out << "date,center_strike,iv_lower,iv_center,iv_upper,delta_lower,delta_center,delta_upper,slope\n";
    for (std::size_t i = 0; i < c.observations.size(); ++i) {
        const auto& o = c.observations[i];
        out << fmt::format("{},{},{},{},{},{},{},{},{}\n", format_date(o.date), number(o.center_strike),
                           number(o.iv_lower), number(o.iv_center), number(o.iv_upper), number(o.delta_lower),
                           number(o.delta_center), number(o.delta_upper), number(c.slopes.at(i)));
    }
    out << fmt::format("average,,,,,,,,{}\n", number(c.s_avg));
}

void write_schedule_csv(std::ostream& out, std::span<const ScheduleRow> rows) {
    out << "produced_at,close,horizon,single_period_vol,multi_period_vol,adjusted_vol\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{},{}\n", format_timestamp(r.produced_at), money(r.close), r.horizon,
                           number(r.single_period), number(r.multi_period), number(r.adjusted));
    }
}

void write_ledger_csv(std::ostream& out, std::span<const TradeRecord> ledger) {
    out << "timestamp,trade_id,action,direction,spread,option_premium,option_traded,underlying_price,delta,"
           "hedge_traded,hedge_after,forced,pnl_total,pnl_underlying,pnl_option,fees,option_fee,perpetual_fee,"
           "option_spread_cost,perpetual_spread_cost\n";
    for (const auto& r : ledger) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", format_timestamp(r.timestamp),
                           r.trade_id, to_string(r.action), to_string(r.direction), number(r.spread),
                           money(r.option_premium), r.option_traded, money(r.underlying_price), number(r.delta),
                           number(r.hedge_traded), number(r.hedge_after), r.forced ? 1 : 0, money(r.pnl_total),
                           money(r.pnl_underlying), money(r.pnl_option), money(r.fees), money(r.fee_detail.option_fee),
                           money(r.fee_detail.perpetual_fee), money(r.fee_detail.option_spread),
                           money(r.fee_detail.perpetual_spread));
    }
}

void write_trade_log_csv(std::ostream& out, std::span<const TradeRecord> ledger) {
    struct Trip {
        const TradeRecord* open = nullptr;
        const TradeRecord* close = nullptr;
        Cents total = 0, underlying = 0, option = 0, fees = 0;
    };
    std::map<std::size_t, Trip> trips;
    for (const auto& r : ledger) {
        auto& t = trips[r.trade_id];
        if (r.action == Action::BuyToOpen || r.action == Action::SellToOpen) t.open = &r;
        if (r.action == Action::BuyToClose || r.action == Action::SellToClose) t.close = &r;
        t.total += r.pnl_total;
        t.underlying += r.pnl_underlying;
        t.option += r.pnl_option;
        t.fees += r.fees;
    }
    out << "trade_id,entry_time,exit_time,direction,entry_spread,exit_spread,entry_premium,exit_premium,"
           "pnl_total,pnl_underlying,pnl_option,fees,forced_close\n";
    for (const auto& [id, t] : trips) {
        if (!t.open) continue;
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", id, format_timestamp(t.open->timestamp),
                           t.close ? format_timestamp(t.close->timestamp) : "", to_string(t.open->direction),
                           number(t.open->spread), t.close ? number(t.close->spread) : "",
                           money(t.open->option_premium), t.close ? money(t.close->option_premium) : "",
                           money(t.total), money(t.underlying), money(t.option), money(t.fees),
                           t.close && t.close->forced ? 1 : 0);
    }
}

void write_performance_csv(std::ostream& out, std::span<const PerformanceRow> rows) {
    out << "refresh_hours,entry_threshold,exit_threshold,smile_adjust,trades,wins,win_loss_ratio,win_rate,"
           "total_pnl,pnl_per_trade,option_fees,perpetual_fees,option_spread_cost,perpetual_spread_cost,"
           "hedge_volume_btc\n";
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", row.refresh_hours,
                           number(row.entry_threshold), number(row.exit_threshold), row.smile_adjust ? 1 : 0,
                           r.trades, r.wins, r.win_loss_ratio ? fmt::format("{:.2f}", *r.win_loss_ratio) : "n/a",
                           fmt::format("{:.4f}", r.win_rate), money(r.total_pnl), money(r.pnl_per_trade),
                           money(r.option_fees), money(r.perpetual_fees), money(r.option_spread_cost),
                           money(r.perpetual_spread_cost), fmt::format("{:.4f}", r.hedge_volume_btc));
    }
}

void write_pnl_curve_csv(std::ostream& out, std::span<const PnlPoint> curve) {
    out << "timestamp,cumulative_pnl_usd\n";
    for (const auto& p : curve) out << format_timestamp(p.timestamp) << ',' << money(p.cumulative) << '\n';
}

void write_returns_csv(std::ostream& out, const ReturnSeries& returns) {
    out << "timestamp,return\n";
    for (const auto& p : returns.points) out << format_timestamp(p.timestamp) << ',' << number(p.value) << '\n';
}

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("cannot open {} for writing", tmp.string()));
        body(out);
        out.flush();
        if (!out) throw Error(fmt::format("failed writing {}", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace volrace::io
