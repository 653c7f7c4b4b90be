#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace volrace {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// Accepts "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]", "YYYY-MM-DDTHH:MM[:SS][.fff][Z]"
// or an integer epoch in milliseconds. Throws volrace::Error on anything else.
Timestamp parse_timestamp(std::string_view text);
Date parse_date(std::string_view text);

std::string format_timestamp(Timestamp ts);  // "YYYY-MM-DD HH:MM:SS"
std::string format_date(Date d);             // "YYYY-MM-DD"

inline Date day_of(Timestamp ts) { return std::chrono::floor<std::chrono::days>(ts); }

// "4Q2018" style label.
std::string quarter_label(Date d);

// ACT/365 year fraction between two instants; negative if `to` precedes `from`.
double year_fraction(Timestamp from, Timestamp to);

}  // namespace volrace
