#include "volrace/forecast_eval.hpp"

#include "volrace/error.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <set>

namespace volrace {

using namespace std::chrono;

namespace {

constexpr double kMinutesPerYear = 525600.0;
constexpr std::size_t kMinIntradayReturns = 30;

}  // namespace

LookbackSpec LookbackSpec::trailing(std::size_t n) {
    if (n < 30) throw ConfigError(fmt::format("look-back of {} days is below the 30-day minimum", n));
    return LookbackSpec{n};
}

LookbackSpec parse_lookback(std::string_view text) {
    std::string t(text);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "whole" || t == "all" || t == "whole-history") return LookbackSpec::whole();
    if (!t.empty() && t.back() == 'd') t.pop_back();
    std::size_t n = 0;
    try {
        std::size_t used = 0;
        n = std::stoul(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
        throw ConfigError(fmt::format("bad look-back '{}'", text));
    }
    return LookbackSpec::trailing(n);
}

std::string to_string(const LookbackSpec& lookback) {
    return lookback.is_whole() ? "whole" : fmt::format("{}d", *lookback.days);
}

std::size_t ForecastSeries::missing() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.vol.has_value(); }));
}

double forecast_from_window(ModelKind kind, std::span<const double> window, const WalkForwardOptions& options) {
    switch (kind) {
        case ModelKind::Hist: return hist_forecast(window, 365.0);
        case ModelKind::Ema: return ema_forecast(window, options.ema, 365.0);
        default: {
            const auto fit = fit_mle(kind, window, options.fit);
            return forecast_one_step(fit, window, 365.0);
        }
    }
}

ForecastSeries walk_forward(ModelKind kind, const LookbackSpec& lookback, const ReturnSeries& daily, Date start,
                            const WalkForwardOptions& options) {
    if (daily.frequency != Frequency::Day1) throw UnsupportedError("walk-forward expects daily returns");
    ForecastSeries out{kind, lookback, {}};
    const auto values = daily.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto origin = day_of(daily.points[i].timestamp);
        if (origin < start) continue;
        const std::size_t end = i + 1;
        const std::size_t len = lookback.is_whole() ? end : std::min(end, *lookback.days);
        ForecastPoint point{origin, origin + days{1}, std::nullopt, {}};
        if (!lookback.is_whole() && end < *lookback.days) {
            point.note = fmt::format("only {} returns available for a {}-day window", end, *lookback.days);
        } else {
            try {
                point.vol = forecast_from_window(kind, std::span<const double>(values).subspan(end - len, len), options);
            } catch (const Error& e) {
                point.note = e.what();
            }
        }
        out.entries.push_back(std::move(point));
    }
    return out;
}

double realized_vol_next_day(const PriceSeries& minute_series, Date day) {
    const Timestamp from{day};
    const Timestamp to{day + days{1}};
    const auto& bars = minute_series.bars;
    auto first = std::lower_bound(bars.begin(), bars.end(), from,
                                  [](const PriceBar& b, Timestamp t) { return b.timestamp < t; });
    std::vector<double> rets;
    for (auto it = first; it != bars.end() && it->timestamp < to; ++it) {
        if (it != first) rets.push_back((it->close - std::prev(it)->close) / std::prev(it)->close);
    }
    if (rets.size() < kMinIntradayReturns) {
        throw InsufficientDataError(
            fmt::format("{} has {} intraday returns, need {}", format_date(day), rets.size(), kMinIntradayReturns));
    }
    return sample_std(rets) * std::sqrt(kMinutesPerYear);
}

std::map<Date, double> daily_realized_vols(const PriceSeries& minute_series) {
    std::map<Date, double> out;
    const auto& bars = minute_series.bars;
    std::vector<double> rets;
    std::size_t i = 0;
    while (i < bars.size()) {
        const auto day = day_of(bars[i].timestamp);
        rets.clear();
        std::size_t j = i + 1;
        for (; j < bars.size() && day_of(bars[j].timestamp) == day; ++j) {
            rets.push_back((bars[j].close - bars[j - 1].close) / bars[j - 1].close);
        }
        if (rets.size() >= kMinIntradayReturns) out[day] = sample_std(rets) * std::sqrt(kMinutesPerYear);
        i = j;
    }
    return out;
}

NamedSeries to_named_series(const ForecastSeries& forecasts, std::string name) {
    NamedSeries out{std::move(name), {}};
    for (const auto& e : forecasts.entries) {
        if (e.vol) out.values.push_back({e.target, *e.vol});
    }
    return out;
}

AlignedTable align(const NamedSeries& response, std::span<const NamedSeries> regressors) {
    std::vector<std::map<Date, double>> maps;
    maps.reserve(regressors.size() + 1);
    std::set<Date> all_dates;
    auto index = [&](const NamedSeries& s) {
        std::map<Date, double> m;
        for (const auto& v : s.values) {
            all_dates.insert(v.date);
            if (std::isfinite(v.value)) m[v.date] = v.value;
        }
        return m;
    };
    maps.push_back(index(response));
    for (const auto& r : regressors) maps.push_back(index(r));

    AlignedTable t;
    t.regressors.resize(regressors.size());
    for (const auto& r : regressors) t.names.push_back(r.name);
    for (const auto d : all_dates) {
        const bool complete = std::all_of(maps.begin(), maps.end(), [&](const auto& m) { return m.count(d) > 0; });
        if (!complete) {
            ++t.dropped;
            continue;
        }
        t.dates.push_back(d);
        t.response.push_back(maps[0].at(d));
        for (std::size_t k = 0; k < regressors.size(); ++k) t.regressors[k].push_back(maps[k + 1].at(d));
    }
    return t;
}

double mae(std::span<const double> actual, std::span<const double> fitted) {
    if (actual.size() != fitted.size()) {
        throw AlignmentError(fmt::format("MAE inputs differ in length ({} vs {})", actual.size(), fitted.size()));
    }
    if (actual.empty()) throw InsufficientDataError("MAE of an empty sample");
    double total = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) total += std::abs(actual[i] - fitted[i]);
    return total / static_cast<double>(actual.size());
}

RegressionResult ols(std::span<const double> y, std::span<const std::vector<double>> columns,
                     std::span<const std::string> names) {
    const auto n = y.size();
    const auto k = columns.size();
    if (names.size() != k) throw Error("one name per regressor column is required");
    for (const auto& c : columns) {
        if (c.size() != n) throw AlignmentError("regressor length differs from the response");
    }
    if (n <= k + 1) {
        throw InsufficientDataError(fmt::format("regression needs n > k + 1 (n = {}, k = {})", n, k));
    }
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(k + 1);
    Eigen::MatrixXd X(rows, cols);
    Eigen::VectorXd Y(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        X(i, 0) = 1.0;
        Y(i) = y[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 1; j < cols; ++j) {
            X(i, j) = columns[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(i)];
        }
    }

    RegressionResult res;
    res.names.push_back("const");
    res.names.insert(res.names.end(), names.begin(), names.end());

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) {
        std::vector<std::string> offending;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index j = qr.rank(); j < cols; ++j) offending.push_back(res.names[static_cast<std::size_t>(perm(j))]);
        std::string list;
        for (const auto& o : offending) list += (list.empty() ? "" : ", ") + o;
        throw CollinearityError(fmt::format("design matrix is rank deficient; collinear: {}", list), offending);
    }
    const Eigen::VectorXd beta = qr.solve(Y);
    const Eigen::VectorXd fitted = X * beta;
    const Eigen::VectorXd resid = Y - fitted;
    const double ssr = resid.squaredNorm();
    const double ybar = Y.mean();
    const double sst = (Y.array() - ybar).square().sum();
    const double dof = static_cast<double>(n - k - 1);

    res.n = n;
    res.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    res.adj_r2 = 1.0 - (1.0 - res.r2) * static_cast<double>(n - 1) / dof;

    // (X'X)^{-1} = P R^{-1} R^{-T} P' from the pivoted QR.
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(cols, cols).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(cols, cols));
    const Eigen::MatrixXd inner = Rinv * Rinv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * inner * perm.transpose();
    const double sigma2 = ssr / dof;

    std::vector<double> yv(y.begin(), y.end());
    std::vector<double> fv(fitted.data(), fitted.data() + fitted.size());
    res.mae = mae(yv, fv);
    for (Eigen::Index j = 0; j < cols; ++j) {
        res.coefficients.push_back(beta(j));
        res.tstats.push_back(beta(j) / std::sqrt(sigma2 * xtx_inv(j, j)));
    }
    return res;
}

RegressionResult ols_predict(const NamedSeries& rv, std::span<const NamedSeries> regressors) {
    const auto table = align(rv, regressors);
    auto res = ols(table.response, table.regressors, table.names);
    res.dropped = table.dropped;
    return res;
}

}  // namespace volrace
