#include "volrace/market_data.hpp"

#include "csv.hpp"
#include "volrace/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <numeric>

namespace volrace {

using namespace std::chrono;

Frequency parse_frequency(std::string_view tag) {
    const auto t = csv::lower(csv::trim(tag));
    if (t == "1min" || t == "minute" || t == "1m") return Frequency::Minute;
    if (t == "1h" || t == "hourly") return Frequency::Hour1;
    if (t == "3h") return Frequency::Hour3;
    if (t == "6h") return Frequency::Hour6;
    if (t == "12h") return Frequency::Hour12;
    if (t == "1d" || t == "daily" || t == "24h") return Frequency::Day1;
    throw UnsupportedError(fmt::format("unknown frequency tag '{}'", tag));
}

std::string to_string(Frequency f) {
    switch (f) {
        case Frequency::Minute: return "1min";
        case Frequency::Hour1: return "1h";
        case Frequency::Hour3: return "3h";
        case Frequency::Hour6: return "6h";
        case Frequency::Hour12: return "12h";
        case Frequency::Day1: return "1d";
    }
    return "?";
}

minutes period_length(Frequency f) {
    switch (f) {
        case Frequency::Minute: return minutes{1};
        case Frequency::Hour1: return hours{1};
        case Frequency::Hour3: return hours{3};
        case Frequency::Hour6: return hours{6};
        case Frequency::Hour12: return hours{12};
        case Frequency::Day1: return hours{24};
    }
    return minutes{1};
}

double periods_per_year(Frequency f) {
    return 365.0 * 1440.0 / static_cast<double>(period_length(f).count());
}

std::vector<Gap> PriceSeries::gaps() const {
    std::vector<Gap> out;
    const auto period = duration_cast<seconds>(period_length(frequency));
    for (std::size_t i = 1; i < bars.size(); ++i) {
        const auto spacing = bars[i].timestamp - bars[i - 1].timestamp;
        if (spacing > period) {
            out.push_back({bars[i - 1].timestamp, bars[i].timestamp,
                           static_cast<std::size_t>(spacing / period) - 1});
        }
    }
    return out;
}

std::vector<double> PriceSeries::closes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(b.close);
    return out;
}

std::vector<double> ReturnSeries::values() const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(p.value);
    return out;
}

void validate(const PriceSeries& series) {
    for (std::size_t i = 0; i < series.bars.size(); ++i) {
        const auto& bar = series.bars[i];
        if (!(bar.close > 0.0) || !std::isfinite(bar.close)) {
            throw Error(fmt::format("non-positive close {} at {}", bar.close, format_timestamp(bar.timestamp)));
        }
        if (bar.volume && *bar.volume < 0.0) {
            throw Error(fmt::format("negative volume at {}", format_timestamp(bar.timestamp)));
        }
        if (i > 0) {
            const auto prev = series.bars[i - 1].timestamp;
            if (bar.timestamp == prev) {
                throw OrderingError(fmt::format("duplicate timestamp {}", format_timestamp(bar.timestamp)));
            }
            if (bar.timestamp < prev) {
                throw OrderingError(fmt::format("timestamp {} precedes {}", format_timestamp(bar.timestamp),
                                                format_timestamp(prev)));
            }
        }
    }
}

PriceSeries parse_price_csv(std::istream& in, Frequency frequency, std::string instrument) {
    std::string line;
    std::size_t line_no = 0;
    if (!csv::next_line(in, line, line_no)) throw ParseError(0, "empty price file");
    const csv::Header header(line);
    const auto ts_col = header.find("timestamp");
    const auto close_col = header.find("close");
    const auto vol_col = header.find("volume");
    if (!ts_col || !close_col) throw ParseError(line_no, "header must name 'timestamp' and 'close' columns");

    PriceSeries series{std::move(instrument), frequency, {}};
    while (csv::next_line(in, line, line_no)) {
        const auto fields = csv::split(line);
        const auto need = std::max({*ts_col, *close_col, vol_col.value_or(0)});
        if (fields.size() <= need) throw ParseError(line_no, "too few columns");
        PriceBar bar;
        try {
            bar.timestamp = parse_timestamp(fields[*ts_col]);
        } catch (const Error& e) {
            throw ParseError(line_no, e.what());
        }
        bar.close = csv::to_double(fields[*close_col], line_no, "close");
        if (vol_col && !fields[*vol_col].empty()) bar.volume = csv::to_double(fields[*vol_col], line_no, "volume");
        if (!series.bars.empty()) {
            const auto prev = series.bars.back().timestamp;
            if (bar.timestamp == prev) {
                throw OrderingError(fmt::format("line {}: duplicate timestamp {}", line_no,
                                                format_timestamp(bar.timestamp)));
            }
            if (bar.timestamp < prev) {
                throw OrderingError(fmt::format("line {}: timestamp {} is not after {}", line_no,
                                                format_timestamp(bar.timestamp), format_timestamp(prev)));
            }
        }
        series.bars.push_back(bar);
    }
    validate(series);
    return series;
}

PriceSeries load_price_csv(const std::filesystem::path& path, Frequency frequency, std::string instrument) {
    std::ifstream in(path);
    if (!in) throw Error(fmt::format("cannot open price file {}", path.string()));
    if (instrument.empty()) instrument = path.stem().string();
    return parse_price_csv(in, frequency, std::move(instrument));
}

PriceSeries resample(const PriceSeries& series, Frequency target) {
    const auto source_len = period_length(series.frequency);
    const auto target_len = period_length(target);
    if (target_len < source_len) {
        throw UnsupportedError(fmt::format("cannot resample {} to finer {}", to_string(series.frequency),
                                           to_string(target)));
    }
    const auto bucket = duration_cast<seconds>(target_len);
    PriceSeries out{series.instrument, target, {}};
    for (const auto& bar : series.bars) {
        const auto secs = bar.timestamp.time_since_epoch().count();
        auto rem = secs % bucket.count();
        if (rem < 0) rem += bucket.count();
        const Timestamp start{seconds{secs - rem}};
        if (out.bars.empty() || out.bars.back().timestamp != start) {
            out.bars.push_back({start, bar.close, bar.volume});
        } else {
            auto& b = out.bars.back();
            b.close = bar.close;
            if (b.volume && bar.volume) {
                *b.volume += *bar.volume;
            } else {
                b.volume.reset();
            }
        }
    }
    return out;
}

ReturnSeries simple_returns(const PriceSeries& series) {
    if (series.bars.size() < 2) {
        throw InsufficientDataError(fmt::format("need at least 2 bars for returns, have {}", series.bars.size()));
    }
    ReturnSeries out{series.frequency, {}};
    out.points.reserve(series.bars.size() - 1);
    for (std::size_t i = 1; i < series.bars.size(); ++i) {
        const double prev = series.bars[i - 1].close;
        out.points.push_back({series.bars[i].timestamp, (series.bars[i].close - prev) / prev});
    }
    return out;
}

double sample_std(std::span<const double> values) {
    const auto n = values.size();
    if (n < 2) throw InsufficientDataError("sample standard deviation needs at least 2 values");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

double realized_vol(std::span<const double> returns, std::size_t window, double ppy) {
    if (window < 2) throw InsufficientDataError("realized volatility window must be at least 2");
    if (returns.size() < window) {
        throw InsufficientDataError(
            fmt::format("realized volatility window {} exceeds {} available returns", window, returns.size()));
    }
    return sample_std(returns.last(window)) * std::sqrt(ppy);
}

double realized_vol(const ReturnSeries& returns, std::size_t window, bool annualize) {
    const auto v = returns.values();
    return realized_vol(v, window, annualize ? periods_per_year(returns.frequency) : 1.0);
}

DescriptiveStats descriptive_stats(const ReturnSeries& returns) {
    const auto n = returns.size();
    if (n < 4) throw InsufficientDataError(fmt::format("descriptive statistics need n >= 4, have {}", n));
    const auto v = returns.values();
    const double nd = static_cast<double>(n);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / nd;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    DescriptiveStats s;
    s.n = n;
    s.mean_return = mean;
    s.annualized_vol = std::sqrt(m2 * nd / (nd - 1.0)) * std::sqrt(periods_per_year(returns.frequency));
    // Moment estimators; both are zero for a constant series by convention.
    s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    s.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    return s;
}

}  // namespace volrace
