// volrace: batch front end. Each subcommand reads a JSON config (optional),
// applies flag overrides, runs its pipeline and writes CSV/JSON under --out.

#include "volrace/backtest.hpp"
#include "volrace/error.hpp"
#include "volrace/forecast_eval.hpp"
#include "volrace/io.hpp"
#include "volrace/market_data.hpp"
#include "volrace/options.hpp"
#include "volrace/smile.hpp"
#include "volrace/vol_models.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace volrace;

namespace {

struct Settings {
    fs::path spot_csv;
    std::string spot_frequency = "1min";
    fs::path options_csv;
    std::vector<std::string> models{"HIST", "EMA", "ARCH", "GARCH", "EGARCH"};
    std::vector<std::string> lookbacks{"whole", "365d"};
    std::optional<std::string> start;
    std::optional<std::string> end;
    std::string ema_convention = "as-written";
    double ema_horizon = 365.0;
    std::size_t min_observations = 30;

    std::optional<std::string> expiry;  // option expiry for iv/smile
    double strike_interval = 1000.0;
    std::vector<std::string> smile_dates;
    std::optional<double> smile_slope;

    std::string instrument;
    std::vector<double> entries{0.05};
    std::vector<double> exits{0.0};
    std::vector<int> refresh_hours{24};
    double rehedge_band = 0.02;
    bool smile_adjust = false;
    bool bid_ask = false;
    bool fees_in_pnl = false;

    std::string sim_model = "GARCH";
    double sim_a0 = 1e-5, sim_alpha = 0.10, sim_beta = 0.85, sim_theta = 0.0;
    std::size_t sim_n = 2000;
    std::string sim_frequency = "1d";
    std::string sim_start = "2018-01-01";
    double sim_price = 10000.0;

    fs::path out = "out";
    std::uint64_t seed = 42;
};

template <class T>
void take(const json& j, const char* key, T& into) {
    if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

template <class T>
void take(const json& j, const char* key, std::optional<T>& into) {
    if (j.contains(key) && !j.at(key).is_null()) into = j.at(key).get<T>();
}

void load_config(const fs::path& path, Settings& s) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config {}: {}", path.string(), e.what()));
    }
    const auto base = path.parent_path();
    const auto resolve = [&](fs::path p) { return p.is_relative() && !p.empty() ? base / p : p; };
    try {
        std::string spot, opts, out;
        take(j, "spot_csv", spot);
        take(j, "options_csv", opts);
        take(j, "out", out);
        if (!spot.empty()) s.spot_csv = resolve(spot);
        if (!opts.empty()) s.options_csv = resolve(opts);
        if (!out.empty()) s.out = resolve(out);
        take(j, "spot_frequency", s.spot_frequency);
        take(j, "models", s.models);
        take(j, "lookbacks", s.lookbacks);
        take(j, "start", s.start);
        take(j, "end", s.end);
        take(j, "seed", s.seed);
        take(j, "min_observations", s.min_observations);
        if (j.contains("ema")) {
            take(j["ema"], "convention", s.ema_convention);
            take(j["ema"], "horizon", s.ema_horizon);
        }
        if (j.contains("options")) {
            const auto& o = j["options"];
            take(o, "expiry", s.expiry);
            take(o, "strike_interval", s.strike_interval);
        }
        if (j.contains("smile")) {
            take(j["smile"], "dates", s.smile_dates);
            take(j["smile"], "slope", s.smile_slope);
        }
        if (j.contains("backtest")) {
            const auto& b = j["backtest"];
            take(b, "instrument", s.instrument);
            take(b, "entry_thresholds", s.entries);
            take(b, "exit_thresholds", s.exits);
            take(b, "refresh_hours", s.refresh_hours);
            take(b, "rehedge_band", s.rehedge_band);
            take(b, "smile_adjust", s.smile_adjust);
            take(b, "bid_ask", s.bid_ask);
            take(b, "fees_in_pnl", s.fees_in_pnl);
        }
        if (j.contains("simulate")) {
            const auto& m = j["simulate"];
            take(m, "model", s.sim_model);
            take(m, "a0", s.sim_a0);
            take(m, "alpha", s.sim_alpha);
            take(m, "beta", s.sim_beta);
            take(m, "theta", s.sim_theta);
            take(m, "n", s.sim_n);
            take(m, "frequency", s.sim_frequency);
            take(m, "start", s.sim_start);
            take(m, "initial_price", s.sim_price);
        }
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("config {}: {}", path.string(), e.what()));
    }
}

// Tracks the pipeline stage so failures can name it.
struct Stage {
    std::string name;
    void operator()(std::string n) { name = std::move(n); }
};

PriceSeries load_spot(const Settings& s) {
    if (s.spot_csv.empty()) throw ConfigError("no spot CSV given (spot_csv / --spot)");
    if (!fs::exists(s.spot_csv)) throw ConfigError(fmt::format("spot CSV {} not found", s.spot_csv.string()));
    return load_price_csv(s.spot_csv, parse_frequency(s.spot_frequency));
}

std::vector<OptionTrade> load_options(const Settings& s) {
    if (s.options_csv.empty()) throw ConfigError("no option trades CSV given (options_csv / --options)");
    if (!fs::exists(s.options_csv)) throw ConfigError(fmt::format("options CSV {} not found", s.options_csv.string()));
    return load_option_trades_csv(s.options_csv);
}

PriceSeries to_frequency(const PriceSeries& p, Frequency f) { return p.frequency == f ? p : resample(p, f); }

ReturnSeries daily_returns(const Settings& s, const PriceSeries& spot) {
    auto r = simple_returns(to_frequency(spot, Frequency::Day1));
    if (s.end) {
        const auto end = parse_date(*s.end);
        std::erase_if(r.points, [&](const ReturnPoint& p) { return day_of(p.timestamp) > end; });
    }
    return r;
}

WalkForwardOptions walk_options(const Settings& s) {
    WalkForwardOptions o;
    o.fit.min_observations = s.min_observations;
    o.ema.horizon = s.ema_horizon;
    if (s.ema_convention == "conventional") {
        o.ema.convention = EmaConvention::Conventional;
    } else if (s.ema_convention != "as-written") {
        throw ConfigError(fmt::format("unknown EMA convention '{}'", s.ema_convention));
    }
    return o;
}

Date required_start(const Settings& s) {
    if (!s.start) throw ConfigError("this command needs a start date (start / --start)");
    return parse_date(*s.start);
}

void cmd_stats(const Settings& s, Stage& stage) {
    stage("load spot");
    const auto spot = load_spot(s);
    stage("statistics");
    std::vector<io::StatsRow> rows;
    for (const auto f : {Frequency::Day1, Frequency::Hour12, Frequency::Hour6, Frequency::Hour3, Frequency::Hour1}) {
        if (period_length(f) < period_length(spot.frequency)) continue;
        rows.push_back({f, descriptive_stats(simple_returns(to_frequency(spot, f)))});
    }
    stage("write");
    io::write_file(s.out / "stats.csv", [&](std::ostream& o) { io::write_stats_csv(o, rows); });
    io::write_file(s.out / "daily_returns.csv",
                   [&](std::ostream& o) { io::write_returns_csv(o, simple_returns(to_frequency(spot, Frequency::Day1))); });
}

void cmd_fit(const Settings& s, Stage& stage) {
    stage("load spot");
    auto returns = daily_returns(s, load_spot(s));
    if (s.start) {
        const auto start = parse_date(*s.start);
        std::erase_if(returns.points, [&](const ReturnPoint& p) { return day_of(p.timestamp) < start; });
    }
    std::vector<FitResult> fits;
    FitOptions opts;
    opts.min_observations = s.min_observations;
    for (const auto& name : s.models) {
        const auto kind = parse_model_kind(name);
        if (!is_conditional(kind)) continue;
        stage("fit " + name);
        fits.push_back(fit_mle(kind, returns, opts));
    }
    if (fits.empty()) throw ConfigError("fit needs at least one of ARCH, GARCH, EGARCH");
    stage("write");
    io::write_file(s.out / "fit.csv", [&](std::ostream& o) { io::write_fit_csv(o, fits); });
    io::write_file(s.out / "fit.json", [&](std::ostream& o) { o << io::fits_json(fits); });
}

std::vector<ForecastSeries> run_forecasts(const Settings& s, const ReturnSeries& returns, Stage& stage) {
    const auto start = required_start(s);
    const auto opts = walk_options(s);
    std::vector<ForecastSeries> out;
    for (const auto& lb : s.lookbacks) {
        const auto lookback = parse_lookback(lb);
        for (const auto& m : s.models) {
            stage(fmt::format("forecast {} {}", m, lb));
            out.push_back(walk_forward(parse_model_kind(m), lookback, returns, start, opts));
        }
    }
    return out;
}

void cmd_forecast(const Settings& s, Stage& stage) {
    stage("load spot");
    const auto returns = daily_returns(s, load_spot(s));
    const auto series = run_forecasts(s, returns, stage);
    stage("write");
    io::write_file(s.out / "forecasts.csv", [&](std::ostream& o) { io::write_forecasts_csv(o, series); });
    io::write_file(s.out / "forecast_distribution.csv",
                   [&](std::ostream& o) { io::write_forecast_distribution_csv(o, series); });
}

std::string label_of(const ForecastSeries& f) { return fmt::format("{} {}", to_string(f.kind), to_string(f.lookback)); }

void cmd_evaluate(const Settings& s, Stage& stage) {
    stage("load spot");
    const auto spot = load_spot(s);
    if (spot.frequency != Frequency::Minute) throw ConfigError("evaluate needs minute spot bars for realized vol");
    const auto returns = daily_returns(s, spot);
    const auto series = run_forecasts(s, returns, stage);

    stage("realized vol");
    NamedSeries rv{"RV", {}};
    for (const auto& [day, v] : daily_realized_vols(spot)) rv.values.push_back({day, v});

    std::optional<NamedSeries> iv;
    if (!s.options_csv.empty()) {
        stage("implied vol");
        if (!s.expiry) throw ConfigError("IV regressor needs options.expiry");
        const auto trades = load_options(s);
        NamedSeries x{"IV", {}};
        for (const auto& d : daily_atm_iv(trades, spot, parse_date(*s.expiry), s.strike_interval)) {
            x.values.push_back({d.day + std::chrono::days{1}, d.iv.iv});
        }
        iv = std::move(x);
    }

    stage("regressions");
    std::vector<io::EvaluationRow> rows;
    for (const auto& f : series) {
        const std::vector<NamedSeries> reg{to_named_series(f, to_string(f.kind))};
        try {
            rows.push_back({label_of(f), ols_predict(rv, reg)});
        } catch (const Error& e) {
            std::cerr << fmt::format("warning: {} skipped: {}\n", label_of(f), e.what());
        }
    }
    // Joint regression on the conditional models (and IV) per look-back.
    for (const auto& lb : s.lookbacks) {
        std::vector<NamedSeries> reg;
        for (const auto& f : series) {
            if (to_string(f.lookback) == to_string(parse_lookback(lb)) && is_conditional(f.kind)) {
                reg.push_back(to_named_series(f, to_string(f.kind)));
            }
        }
        if (iv) reg.push_back(*iv);
        if (reg.size() < 2) continue;
        const auto label = fmt::format("joint {}", to_string(parse_lookback(lb)));
        try {
            rows.push_back({label, ols_predict(rv, reg)});
        } catch (const Error& e) {
            std::cerr << fmt::format("warning: {} skipped: {}\n", label, e.what());
        }
    }

    stage("write");
    io::write_file(s.out / "evaluation.csv", [&](std::ostream& o) { io::write_evaluation_csv(o, rows); });
    io::write_file(s.out / "evaluation.json", [&](std::ostream& o) { o << io::evaluation_json(rows); });
    io::write_file(s.out / "forecasts.csv", [&](std::ostream& o) { io::write_forecasts_csv(o, series); });
    std::vector<std::pair<std::string, double>> rv_points;
    for (const auto& v : rv.values) rv_points.emplace_back(format_date(v.date), v.value);
    io::write_file(s.out / "plot_realized_vol.csv", [&](std::ostream& o) { io::write_xy_csv(o, "date", "rv", rv_points); });
    for (const auto& f : series) {
        std::vector<std::pair<std::string, double>> pts;
        for (const auto& e : f.entries) {
            if (e.vol) pts.emplace_back(format_date(e.target), *e.vol);
        }
        const auto name = fmt::format("plot_forecast_{}_{}.csv", to_string(f.kind), to_string(f.lookback));
        io::write_file(s.out / name, [&](std::ostream& o) { io::write_xy_csv(o, "date", "forecast", pts); });
    }
}

void cmd_iv(const Settings& s, Stage& stage) {
    stage("load options");
    const auto trades = load_options(s);
    stage("exchange summary");
    const auto summary = exchange_summary(trades);
    io::write_file(s.out / "exchange_summary.csv", [&](std::ostream& o) { io::write_exchange_summary_csv(o, summary); });
    if (!s.expiry) return;
    stage("load spot");
    const auto spot = load_spot(s);
    stage("daily ATM IV");
    const auto daily = daily_atm_iv(trades, spot, parse_date(*s.expiry), s.strike_interval);
    stage("write");
    io::write_file(s.out / "daily_atm_iv.csv", [&](std::ostream& o) { io::write_daily_iv_csv(o, daily); });
    std::vector<std::pair<std::string, double>> pts;
    for (const auto& d : daily) pts.emplace_back(format_date(d.day), d.iv.iv);
    io::write_file(s.out / "plot_atm_iv.csv", [&](std::ostream& o) { io::write_xy_csv(o, "date", "iv", pts); });
}

std::vector<Date> smile_dates(const Settings& s) {
    if (s.smile_dates.empty()) return default_calibration_dates();
    std::vector<Date> d;
    for (const auto& t : s.smile_dates) d.push_back(parse_date(t));
    return d;
}

SmileCalibration run_smile(const Settings& s, std::span<const OptionTrade> trades, const PriceSeries& spot, Date expiry) {
    const auto daily = to_frequency(spot, Frequency::Day1);
    const auto dates = smile_dates(s);
    auto cal = calibrate_smile(trades, daily, dates, expiry);
    for (const auto& w : cal.skipped) std::cerr << "warning: smile " << w << '\n';
    return cal;
}

void cmd_smile(const Settings& s, Stage& stage) {
    stage("load");
    if (!s.expiry) throw ConfigError("smile needs options.expiry");
    const auto trades = load_options(s);
    const auto spot = load_spot(s);
    stage("calibrate");
    const auto cal = run_smile(s, trades, spot, parse_date(*s.expiry));
    stage("write");
    io::write_file(s.out / "smile.csv", [&](std::ostream& o) { io::write_smile_csv(o, cal); });
}

std::string fmt_threshold(double x) { return fmt::format("{:.2f}", x); }

void cmd_backtest(const Settings& s, Stage& stage) {
    stage("load");
    if (s.instrument.empty()) throw ConfigError("backtest needs backtest.instrument / --instrument");
    const auto contract = parse_instrument_name(s.instrument);
    const auto start = required_start(s);
    const auto trades = load_options(s);
    const auto spot = load_spot(s);

    std::optional<double> slope;
    if (s.smile_adjust) {
        slope = s.smile_slope;
        if (!slope) {
            stage("smile calibration");
            slope = run_smile(s, trades, spot, contract.expiry).s_avg;
        }
    }

    std::vector<io::PerformanceRow> perf;
    for (const int refresh : s.refresh_hours) {
        stage(fmt::format("GARCH schedule {}h", refresh));
        ScheduleOptions so;
        so.start = start;
        so.expiry = contract.expiry;
        so.refresh_hours = refresh;
        so.traded_strike = contract.strike;
        so.smile_slope = slope;
        so.fit.min_observations = s.min_observations;
        const auto schedule = build_garch_schedule(spot, so);
        for (const auto& w : schedule.warnings) std::cerr << "warning: " << w << '\n';
        io::write_file(s.out / fmt::format("schedule_{}h.csv", refresh),
                       [&](std::ostream& o) { io::write_schedule_csv(o, schedule.rows); });

        for (const double entry : s.entries) {
            for (const double exit : s.exits) {
                const auto tag = fmt::format("{}h_{}_{}", refresh, fmt_threshold(entry), fmt_threshold(exit));
                stage("backtest " + tag);
                StrategyConfig cfg;
                cfg.entry_threshold = entry;
                cfg.exit_threshold = exit;
                cfg.rehedge_band = s.rehedge_band;
                cfg.garch_refresh_hours = refresh;
                cfg.instrument = s.instrument;
                cfg.smile_adjust = s.smile_adjust;
                cfg.fees.bid_ask = s.bid_ask;
                cfg.fees.include_in_pnl = s.fees_in_pnl;
                const auto result = run_backtest(cfg, trades, spot, schedule.schedule);
                for (const auto& w : result.warnings) std::cerr << "warning: " << tag << ": " << w << '\n';
                io::write_file(s.out / fmt::format("ledger_{}.csv", tag),
                               [&](std::ostream& o) { io::write_ledger_csv(o, result.ledger); });
                io::write_file(s.out / fmt::format("trades_{}.csv", tag),
                               [&](std::ostream& o) { io::write_trade_log_csv(o, result.ledger); });
                io::write_file(s.out / fmt::format("pnl_{}.csv", tag),
                               [&](std::ostream& o) { io::write_pnl_curve_csv(o, result.pnl_curve); });
                perf.push_back({refresh, entry, exit, s.smile_adjust, result.report});
            }
        }
    }
    stage("write");
    io::write_file(s.out / "performance.csv", [&](std::ostream& o) { io::write_performance_csv(o, perf); });
}

void cmd_simulate(const Settings& s, Stage& stage) {
    stage("simulate");
    const auto kind = parse_model_kind(s.sim_model);
    const GarchParams p{s.sim_a0, s.sim_alpha, s.sim_beta, s.sim_theta};
    check_params(kind, p);
    const auto freq = parse_frequency(s.sim_frequency);
    const Timestamp t0{parse_date(s.sim_start)};
    const auto returns = simulate(kind, p, s.sim_n, s.seed, freq, t0 + period_length(freq));
    PriceSeries prices{"SIM", freq, {}};
    double price = s.sim_price;
    prices.bars.push_back({t0, price, std::nullopt});
    for (const auto& r : returns.points) {
        price *= 1.0 + r.value;
        prices.bars.push_back({r.timestamp, price, std::nullopt});
    }
    stage("write");
    io::write_file(s.out / "simulated_returns.csv", [&](std::ostream& o) { io::write_returns_csv(o, returns); });
    io::write_file(s.out / "simulated_prices.csv", [&](std::ostream& o) {
        o << "timestamp,close\n";
        for (const auto& b : prices.bars) o << format_timestamp(b.timestamp) << ',' << io::number(b.close) << '\n';
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volatility model horserace and option backtesting toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::string> out, spot, spot_frequency, options, start, end, expiry, instrument, ema;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n;
    std::vector<std::string> models, lookbacks;
    std::vector<double> entries, exits;
    std::vector<int> refresh;
    bool smile_flag = false, bid_ask = false, fees_in_pnl = false;

    app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory");
    app.add_option("--seed", seed, "RNG seed for simulation");
    app.add_option("--spot", spot, "spot price CSV");
    app.add_option("--spot-frequency", spot_frequency, "sampling of the spot CSV (1min, 1h, ..., 1d)");
    app.add_option("--options", options, "option trades CSV");
    app.add_option("--start", start, "first forecast / trading date (YYYY-MM-DD)");
    app.add_option("--end", end, "last daily return to use (YYYY-MM-DD)");
    app.add_option("--model", models, "model name, repeatable");
    app.add_option("--lookback", lookbacks, "look-back window (whole, 365d), repeatable");
    app.add_option("--ema", ema, "EMA convention: as-written or conventional");
    app.add_option("--expiry", expiry, "option expiry date for iv/smile");
    app.add_option("--instrument", instrument, "option contract traded by the backtest");
    app.add_option("--entry", entries, "entry threshold, repeatable");
    app.add_option("--exit", exits, "exit threshold, repeatable");
    app.add_option("--refresh", refresh, "GARCH refresh hours (24 or 12), repeatable");
    app.add_flag("--smile", smile_flag, "apply the smile adjustment in the backtest");
    app.add_flag("--bid-ask", bid_ask, "charge half bid-ask spreads");
    app.add_flag("--fees-in-pnl", fees_in_pnl, "deduct costs from PNL");
    app.add_option("--n", n, "simulated sample length");

    const std::vector<std::pair<std::string, void (*)(const Settings&, Stage&)>> commands{
        {"stats", cmd_stats},       {"fit", cmd_fit},     {"forecast", cmd_forecast}, {"evaluate", cmd_evaluate},
        {"iv", cmd_iv},             {"smile", cmd_smile}, {"backtest", cmd_backtest}, {"simulate", cmd_simulate}};
    const std::vector<std::string> help{"descriptive statistics at daily to hourly sampling",
                                        "in-sample ARCH/GARCH/EGARCH fits",
                                        "walk-forward daily forecasts",
                                        "predictive regressions of realized vol on forecasts",
                                        "option exchange summary and daily ATM implied vol",
                                        "delta-space smile slope calibration",
                                        "volatility-spread strategy backtest",
                                        "simulate returns and prices from a model"};
    app.fallthrough();
    for (std::size_t i = 0; i < commands.size(); ++i) app.add_subcommand(commands[i].first, help[i]);

    CLI11_PARSE(app, argc, argv);

    Settings s;
    Stage stage{"config"};
    try {
        if (!config_path.empty()) load_config(config_path, s);
        if (out) s.out = *out;
        if (seed) s.seed = *seed;
        if (spot) s.spot_csv = *spot;
        if (spot_frequency) s.spot_frequency = *spot_frequency;
        if (options) s.options_csv = *options;
        if (start) s.start = start;
        if (end) s.end = end;
        if (ema) s.ema_convention = *ema;
        if (expiry) s.expiry = expiry;
        if (instrument) s.instrument = *instrument;
        if (n) s.sim_n = *n;
        if (!models.empty()) s.models = models;
        if (!lookbacks.empty()) s.lookbacks = lookbacks;
        if (!entries.empty()) s.entries = entries;
        if (!exits.empty()) s.exits = exits;
        if (!refresh.empty()) s.refresh_hours = refresh;
        if (smile_flag) s.smile_adjust = true;
        if (bid_ask) s.bid_ask = true;
        if (fees_in_pnl) s.fees_in_pnl = true;
    } catch (const std::exception& e) {
        std::cerr << "volrace: config: " << e.what() << '\n';
        return 2;
    }

    for (const auto& [name, fn] : commands) {
        if (!app.got_subcommand(name)) continue;
        try {
            fn(s, stage);
        } catch (const ConfigError& e) {
            std::cerr << fmt::format("volrace {}: config: {}\n", name, e.what());
            return 2;
        } catch (const std::exception& e) {
            std::cerr << fmt::format("volrace {}: stage '{}' failed: {}\n", name, stage.name, e.what());
            return 1;
        }
    }
    return 0;
}
