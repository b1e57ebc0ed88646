#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bldgcast/error.hpp"
#include "bldgcast/timeutil.hpp"

namespace bldgcast {

enum class Channel { Energy, Occupancy, Temperature, Humidity, Calendar };

inline constexpr Channel kAllChannels[] = {Channel::Energy, Channel::Occupancy, Channel::Temperature,
                                           Channel::Humidity, Channel::Calendar};

constexpr std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::Energy: return "energy";
    case Channel::Occupancy: return "occupancy";
    case Channel::Temperature: return "temperature";
    case Channel::Humidity: return "humidity";
    case Channel::Calendar: return "calendar";
  }
  return "unknown";
}

constexpr std::string_view default_unit(Channel c) {
  switch (c) {
    case Channel::Energy: return "Wh";
    case Channel::Occupancy: return "count";
    case Channel::Temperature: return "°C";
    case Channel::Humidity: return "relative";
    case Channel::Calendar: return "binary";
  }
  return "";
}

inline std::optional<Channel> parse_channel(std::string_view name) {
  for (Channel c : kAllChannels) {
    if (channel_name(c) == name) return c;
  }
  return std::nullopt;
}

struct SeriesPoint {
  Timestamp time = 0;
  std::optional<double> value;

  bool operator==(const SeriesPoint&) const = default;
};

/// One sensor channel at its native sampling rate. Missing cells stay in the
/// series as points without a value.
struct RawSeries {
  Channel channel = Channel::Energy;
  std::string unit{default_unit(Channel::Energy)};
  std::int64_t interval_native = 0;
  std::vector<SeriesPoint> points;

  bool operator==(const RawSeries&) const = default;
};

/// Most frequent positive gap between consecutive timestamps; ties go to the
/// smaller gap. Zero for series with fewer than two points.
inline std::int64_t modal_interval(const std::vector<SeriesPoint>& points) {
  std::map<std::int64_t, std::size_t> counts;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const std::int64_t gap = points[i].time - points[i - 1].time;
    if (gap > 0) ++counts[gap];
  }
  std::int64_t best = 0;
  std::size_t best_count = 0;
  for (const auto& [gap, count] : counts) {
    if (count > best_count) {
      best = gap;
      best_count = count;
    }
  }
  return best;
}

class ValidatedSeries;

namespace detail {
struct SeriesAccess {
  static ValidatedSeries make(RawSeries s);
};
}  // namespace detail

/// A RawSeries whose ordering and range invariants have been checked.
/// Only `validate_series` and the resampling operations construct one.
class ValidatedSeries {
 public:
  const RawSeries& raw() const noexcept { return series_; }
  Channel channel() const noexcept { return series_.channel; }
  std::int64_t interval() const noexcept { return series_.interval_native; }
  const std::vector<SeriesPoint>& points() const noexcept { return series_.points; }
  std::size_t size() const noexcept { return series_.points.size(); }

  bool operator==(const ValidatedSeries&) const = default;

 private:
  friend struct detail::SeriesAccess;
  explicit ValidatedSeries(RawSeries s) : series_(std::move(s)) {}
  RawSeries series_;
};

inline ValidatedSeries detail::SeriesAccess::make(RawSeries s) { return ValidatedSeries(std::move(s)); }

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

inline bool is_missing_token(std::string_view s) {
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

/// Shortest decimal text that parses back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

/// Parses a `timestamp,value` CSV. Rows are kept in file order; ordering is
/// checked later by `validate_series`.
inline RawSeries parse_series(std::string_view text, Channel channel, std::int64_t local_offset_seconds = 0) {
  RawSeries out;
  out.channel = channel;
  out.unit = std::string(default_unit(channel));

  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = detail::trim(text.substr(0, nl));
    text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.remove_prefix(3);  // BOM
      if (line != "timestamp,value") {
        fail(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": expected header 'timestamp,value'");
      }
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    const std::string_view ts_text = detail::trim(line.substr(0, comma));
    const std::string_view value_text =
        (comma == std::string_view::npos) ? std::string_view{} : detail::trim(line.substr(comma + 1));
    const auto ts = parse_timestamp(ts_text, local_offset_seconds);
    if (!ts) fail(ErrorCode::MalformedTimestamp, "line " + std::to_string(line_no));
    SeriesPoint p{*ts, std::nullopt};
    if (!detail::is_missing_token(value_text)) {
      p.value = detail::parse_double(value_text);
      if (!p.value) fail(ErrorCode::NonNumericValue, "line " + std::to_string(line_no));
    }
    out.points.push_back(p);
  }
  if (out.points.empty()) fail(ErrorCode::EmptyFile, "no data rows");
  out.interval_native = modal_interval(out.points);
  return out;
}

/// Inverse of `parse_series`: UTC timestamps, missing values as empty cells.
inline std::string serialize_series(const RawSeries& s) {
  std::string out = "timestamp,value\n";
  out.reserve(out.size() + s.points.size() * 32);
  for (const auto& p : s.points) {
    out += format_timestamp(p.time);
    out += ',';
    if (p.value) out += detail::format_double(*p.value);
    out += '\n';
  }
  return out;
}

inline ValidatedSeries validate_series(const RawSeries& s) {
  if (s.unit != default_unit(s.channel)) {
    fail(ErrorCode::UnitMismatch, "unit '" + s.unit + "' does not match channel " + std::string(channel_name(s.channel)));
  }
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    if (i > 0 && s.points[i].time <= s.points[i - 1].time) {
      fail(ErrorCode::NonMonotonicTimestamps, "index " + std::to_string(i));
    }
    const auto& v = s.points[i].value;
    if (!v) continue;
    if ((s.channel == Channel::Energy || s.channel == Channel::Occupancy) && *v < 0.0) {
      fail(ErrorCode::NegativeValue, "index " + std::to_string(i) + " channel " + std::string(channel_name(s.channel)));
    }
    if (s.channel == Channel::Calendar && *v != 0.0 && *v != 1.0) {
      fail(ErrorCode::CalendarNotBinary, "index " + std::to_string(i));
    }
  }
  RawSeries copy = s;
  copy.interval_native = modal_interval(copy.points);
  return detail::SeriesAccess::make(std::move(copy));
}

}  // namespace bldgcast
