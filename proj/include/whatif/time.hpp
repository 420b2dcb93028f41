// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace whatif {

using Date = std::chrono::sys_days;
using Timestamp = std::chrono::sys_seconds;

namespace detail {

inline bool parse_fixed_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses a `YYYY-MM-DD` calendar date. Rejects impossible dates.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!detail::parse_fixed_int(s.substr(0, 4), y) || !detail::parse_fixed_int(s.substr(5, 2), m) ||
      !detail::parse_fixed_int(s.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Parses `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS][Z]` (space also accepted as
/// separator). Times are UTC.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
  if (s.size() < 10) return std::nullopt;
  const auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  Timestamp ts{*date};
  if (s.size() == 10) return ts;
  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  std::string_view rest = s.substr(11);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  int hh = 0, mm = 0, ss = 0;
  if (rest.size() != 5 && rest.size() != 8) return std::nullopt;
  if (rest[2] != ':' || !detail::parse_fixed_int(rest.substr(0, 2), hh) ||
      !detail::parse_fixed_int(rest.substr(3, 2), mm))
    return std::nullopt;
  if (rest.size() == 8 && (rest[5] != ':' || !detail::parse_fixed_int(rest.substr(6, 2), ss)))
    return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  return ts + std::chrono::hours{hh} + std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

inline std::string format_timestamp(Timestamp ts) {
  const auto day = std::chrono::floor<std::chrono::days>(ts);
  const std::chrono::hh_mm_ss hms{ts - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "T%02ld:%02ld:%02ldZ", static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()), static_cast<long>(hms.seconds().count()));
  return format_date(Date{day}) + buf;
}

/// Monday on or before `date`.
inline Date week_start(Date date) {
  const std::chrono::weekday wd{date};
  return date - std::chrono::days{(wd.iso_encoding() + 6) % 7};
}

}  // namespace whatif
