#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace bldgcast {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

inline constexpr std::int64_t kSecondsPerDay = 86400;

namespace detail {

inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return ec == std::errc{} && ptr == s.data() + pos + len;
}

}  // namespace detail

inline Timestamp from_civil(int year, unsigned month, unsigned day, int hour = 0, int minute = 0, int second = 0) {
  using namespace std::chrono;
  const sys_days d = year_month_day{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  return static_cast<Timestamp>(d.time_since_epoch().count()) * kSecondsPerDay + hour * 3600 + minute * 60 + second;
}

/// Parses ISO-8601 date-times such as `2014-02-15T18:50:00Z`, `2014-02-15 18:50`
/// or `2014-02-15T18:50:00+05:30`. Strings without a zone designator are naive
/// local time; `local_offset_seconds` is subtracted to reach UTC.
inline std::optional<Timestamp> parse_timestamp(std::string_view s, std::int64_t local_offset_seconds = 0) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (s.size() < 10 || !detail::read_int(s, 0, 4, year) || s[4] != '-' || !detail::read_int(s, 5, 2, month) ||
      s[7] != '-' || !detail::read_int(s, 8, 2, day)) {
    return std::nullopt;
  }
  std::size_t pos = 10;
  if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
    if (!detail::read_int(s, pos + 1, 2, hour) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
        !detail::read_int(s, pos + 4, 2, minute)) {
      return std::nullopt;
    }
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (!detail::read_int(s, pos + 1, 2, second)) return std::nullopt;
      pos += 3;
      // fractional seconds are truncated
      if (pos < s.size() && s[pos] == '.') {
        ++pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      }
    }
  }
  std::int64_t offset = local_offset_seconds;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      offset = 0;
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (!detail::read_int(s, pos + 1, 2, oh) || !detail::read_int(s, pos + 4, 2, om)) return std::nullopt;
      offset = (s[pos] == '-' ? -1 : 1) * (oh * 3600 + om * 60);
    } else {
      return std::nullopt;
    }
  }
  if (month < 1 || month > 12 || hour > 23 || minute > 59 || second > 60) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  return from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day), hour, minute, second) - offset;
}

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const std::int64_t days = (t >= 0) ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
  const std::int64_t sod = t - days * kSecondsPerDay;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(sod / 3600),
                static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
  return buf;
}

/// Day number (days since epoch) of `t` in a fixed-offset local clock.
inline std::int64_t local_day(Timestamp t, std::int64_t offset_seconds) {
  const Timestamp local = t + offset_seconds;
  return (local >= 0) ? local / kSecondsPerDay : -((-local + kSecondsPerDay - 1) / kSecondsPerDay);
}

/// Seconds since local midnight.
inline std::int64_t local_time_of_day(Timestamp t, std::int64_t offset_seconds) {
  return t + offset_seconds - local_day(t, offset_seconds) * kSecondsPerDay;
}

/// 0 = Monday ... 6 = Sunday.
inline int local_weekday(Timestamp t, std::int64_t offset_seconds) {
  const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{local_day(t, offset_seconds)}}};
  return static_cast<int>(wd.iso_encoding()) - 1;
}

inline std::int64_t floor_to(std::int64_t t, std::int64_t step) {
  const std::int64_t q = t / step;
  return (q * step > t) ? (q - 1) * step : q * step;
}

}  // namespace bldgcast
