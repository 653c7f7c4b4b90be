#include "volrace/time.hpp"

#include "volrace/error.hpp"

#include <charconv>
#include <fmt/format.h>

namespace volrace {

namespace {

using namespace std::chrono;

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

int to_int(std::string_view s, std::string_view whole) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(fmt::format("bad timestamp '{}'", whole));
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

Date checked_date(std::string_view s, std::string_view whole) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw Error(fmt::format("bad date '{}'", whole));
    }
    const year_month_day ymd{year{to_int(s.substr(0, 4), whole)},
                             month{static_cast<unsigned>(to_int(s.substr(5, 2), whole))},
                             day{static_cast<unsigned>(to_int(s.substr(8, 2), whole))}};
    if (!ymd.ok()) throw Error(fmt::format("invalid calendar date '{}'", whole));
    return sys_days{ymd};
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    const auto s = trim(text);
    if (all_digits(s) && s.size() > 10) {
        long long ms = 0;
        std::from_chars(s.data(), s.data() + s.size(), ms);
        return floor<seconds>(sys_time<milliseconds>{milliseconds{ms}});
    }
    if (s.size() < 10) throw Error(fmt::format("bad timestamp '{}'", text));
    Timestamp ts{checked_date(s.substr(0, 10), text)};
    auto rest = s.substr(10);
    if (rest.empty()) return ts;
    if (rest.front() != 'T' && rest.front() != ' ') throw Error(fmt::format("bad timestamp '{}'", text));
    rest.remove_prefix(1);
    if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
    if (rest.size() < 5 || rest[2] != ':') throw Error(fmt::format("bad timestamp '{}'", text));
    const int hh = to_int(rest.substr(0, 2), text);
    const int mm = to_int(rest.substr(3, 2), text);
    int ss = 0;
    rest.remove_prefix(5);
    if (!rest.empty()) {
        if (rest.size() < 3 || rest[0] != ':') throw Error(fmt::format("bad timestamp '{}'", text));
        ss = to_int(rest.substr(1, 2), text);
        rest.remove_prefix(3);
        // Fractional seconds are truncated.
        if (!rest.empty() && (rest[0] != '.' || !all_digits(rest.substr(1)))) {
            throw Error(fmt::format("bad timestamp '{}'", text));
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) throw Error(fmt::format("bad time of day '{}'", text));
    return ts + hours{hh} + minutes{mm} + seconds{ss};
}

Date parse_date(std::string_view text) {
    const auto s = trim(text);
    return checked_date(s, text);
}

std::string format_date(Date d) {
    const year_month_day ymd{d};
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
}

std::string format_timestamp(Timestamp ts) {
    const auto d = day_of(ts);
    const hh_mm_ss tod{ts - d};
    return fmt::format("{} {:02d}:{:02d}:{:02d}", format_date(d), tod.hours().count(),
                       tod.minutes().count(), tod.seconds().count());
}

std::string quarter_label(Date d) {
    const year_month_day ymd{d};
    const unsigned q = (static_cast<unsigned>(ymd.month()) - 1) / 3 + 1;
    return fmt::format("{}Q{}", q, static_cast<int>(ymd.year()));
}

double year_fraction(Timestamp from, Timestamp to) {
    return static_cast<double>((to - from).count()) / (365.0 * 86400.0);
}

}  // namespace volrace
