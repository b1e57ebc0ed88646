#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iterator>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bldgcast/error.hpp"
#include "bldgcast/ingest.hpp"
#include "bldgcast/timeutil.hpp"

namespace bldgcast {

inline constexpr std::int64_t kDefaultGridSeconds = 600;

enum class Aggregation { Sum, Mean, Last };

struct AlignedRow {
  Timestamp time = 0;
  double energy = 0.0;
  double occupancy = 0.0;
  double temperature = 0.0;
  double humidity = 0.0;
  double calendar = 0.0;

  bool operator==(const AlignedRow&) const = default;
};

/// Fully imputed table on a regular grid. `utc_offset` is the fixed local-clock
/// offset used for day boundaries (calendar, lag features).
struct AlignedDataset {
  std::int64_t grid_interval = kDefaultGridSeconds;
  std::int64_t utc_offset = 0;
  std::vector<AlignedRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool operator==(const AlignedDataset&) const = default;
};

/// Column order used everywhere a row is viewed as a feature vector.
inline constexpr std::size_t kNumColumns = 5;
inline constexpr std::array<std::string_view, kNumColumns> kColumnNames = {"energy", "occupancy", "temperature",
                                                                           "humidity", "calendar"};

inline std::array<double, kNumColumns> row_values(const AlignedRow& r) {
  return {r.energy, r.occupancy, r.temperature, r.humidity, r.calendar};
}

inline double& row_value(AlignedRow& r, std::size_t column) {
  switch (column) {
    case 0: return r.energy;
    case 1: return r.occupancy;
    case 2: return r.temperature;
    case 3: return r.humidity;
    default: return r.calendar;
  }
}

inline std::vector<double> column(const AlignedDataset& d, std::size_t c) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const auto& r : d.rows) out.push_back(row_values(r)[c]);
  return out;
}

/// Checks grid regularity and value completeness; throws FormatError on violation.
inline void check_aligned(const AlignedDataset& d) {
  if (d.grid_interval <= 0) fail(ErrorCode::FormatError, "grid interval must be positive");
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (i > 0 && d.rows[i].time - d.rows[i - 1].time != d.grid_interval) {
      fail(ErrorCode::FormatError, "row " + std::to_string(i) + " breaks the grid progression");
    }
    for (double v : row_values(d.rows[i])) {
      if (!std::isfinite(v)) fail(ErrorCode::FormatError, "row " + std::to_string(i) + " has a missing value");
    }
  }
}

namespace detail {

inline RawSeries with_points(const ValidatedSeries& s, std::int64_t interval, std::vector<SeriesPoint> points) {
  RawSeries out;
  out.channel = s.channel();
  out.unit = s.raw().unit;
  out.interval_native = interval;
  out.points = std::move(points);
  return out;
}

inline std::vector<SeriesPoint> known_points(const std::vector<SeriesPoint>& pts) {
  std::vector<SeriesPoint> known;
  for (const auto& p : pts) {
    if (p.value) known.push_back(p);
  }
  return known;
}

/// Piecewise-linear value at `t` through time-ordered known points, constant
/// beyond either end. `hint` carries the search position across monotone queries.
inline double interpolate_known(const std::vector<SeriesPoint>& known, Timestamp t, std::size_t& hint) {
  if (t <= known.front().time) return *known.front().value;
  if (t >= known.back().time) return *known.back().value;
  if (hint >= known.size() || known[hint].time > t) hint = 0;
  while (hint + 1 < known.size() && known[hint + 1].time <= t) ++hint;
  const auto& a = known[hint];
  if (a.time == t) return *a.value;
  const auto& b = known[hint + 1];
  const double frac = static_cast<double>(t - a.time) / static_cast<double>(b.time - a.time);
  return *a.value + (*b.value - *a.value) * frac;
}

}  // namespace detail

/// Aggregates into windows [t, t + target) aligned to multiples of `target`.
/// Windows with no present input are emitted as missing.
inline ValidatedSeries downsample(const ValidatedSeries& s, std::int64_t target, Aggregation agg) {
  const std::int64_t native = s.interval();
  if (target <= 0 || (native > 0 && target % native != 0)) {
    fail(ErrorCode::IncompatibleInterval,
         "native " + std::to_string(native) + " s, target " + std::to_string(target) + " s");
  }
  std::vector<SeriesPoint> out;
  if (s.size() == 0) return detail::SeriesAccess::make(detail::with_points(s, target, {}));

  const Timestamp first = floor_to(s.points().front().time, target);
  const Timestamp last = floor_to(s.points().back().time, target);
  out.reserve(static_cast<std::size_t>((last - first) / target + 1));
  std::size_t i = 0;
  for (Timestamp w = first; w <= last; w += target) {
    double sum = 0.0;
    std::size_t count = 0;
    std::optional<double> last_value;
    for (; i < s.size() && s.points()[i].time < w + target; ++i) {
      const auto& v = s.points()[i].value;
      if (!v) continue;
      sum += *v;
      ++count;
      last_value = *v;
    }
    SeriesPoint p{w, std::nullopt};
    if (count > 0) {
      switch (agg) {
        case Aggregation::Sum: p.value = sum; break;
        case Aggregation::Mean: p.value = sum / static_cast<double>(count); break;
        case Aggregation::Last: p.value = last_value; break;
      }
    }
    out.push_back(p);
  }
  return detail::SeriesAccess::make(detail::with_points(s, target, std::move(out)));
}

/// Inserts missing points every `target` seconds between original samples.
inline ValidatedSeries upsample(const ValidatedSeries& s, std::int64_t target) {
  const std::int64_t native = s.interval();
  if (target <= 0 || (native > 0 && native % target != 0)) {
    fail(ErrorCode::IncompatibleInterval,
         "native " + std::to_string(native) + " s, target " + std::to_string(target) + " s");
  }
  std::vector<SeriesPoint> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.push_back(s.points()[i]);
    if (i + 1 == s.size()) break;
    for (Timestamp t = s.points()[i].time + target; t < s.points()[i + 1].time; t += target) {
      out.push_back({t, std::nullopt});
    }
  }
  return detail::SeriesAccess::make(detail::with_points(s, native == 0 ? 0 : target, std::move(out)));
}

/// Fills missing points linearly in time; boundary gaps take the nearest known value.
inline ValidatedSeries time_interpolate(const ValidatedSeries& s) {
  const auto known = detail::known_points(s.points());
  if (known.size() < 2) fail(ErrorCode::InsufficientKnownPoints, std::to_string(known.size()) + " known points");
  std::vector<SeriesPoint> out = s.points();
  std::size_t hint = 0;
  for (auto& p : out) {
    if (!p.value) p.value = detail::interpolate_known(known, p.time, hint);
  }
  return detail::SeriesAccess::make(detail::with_points(s, s.interval(), std::move(out)));
}

namespace detail {

inline Aggregation fuse_aggregation(Channel c) {
  switch (c) {
    case Channel::Energy: return Aggregation::Sum;
    case Channel::Temperature:
    case Channel::Humidity: return Aggregation::Mean;
    default: return Aggregation::Last;
  }
}

/// Brings a channel to `grid` seconds (downsampling or upsampling as needed).
inline ValidatedSeries to_grid(const ValidatedSeries& s, std::int64_t grid) {
  if (s.interval() == 0 || s.interval() == grid) return s;
  if (s.interval() < grid) return downsample(s, grid, fuse_aggregation(s.channel()));
  return upsample(s, grid);
}

struct Coverage {
  Timestamp start;
  Timestamp end;
};

}  // namespace detail

/// Intersects all five channels on a common grid and imputes every cell.
/// Calendar points are day-level flags: each covers its whole local day and is
/// forward-filled across days without a point.
inline AlignedDataset fuse(const std::map<Channel, ValidatedSeries>& channels,
                           std::int64_t grid_interval = kDefaultGridSeconds, std::int64_t utc_offset = 0) {
  for (Channel c : kAllChannels) {
    auto it = channels.find(c);
    if (it == channels.end() || it->second.size() == 0) {
      fail(ErrorCode::MissingChannel, std::string(channel_name(c)));
    }
    if (it->second.channel() != c) {
      fail(ErrorCode::MissingChannel, std::string(channel_name(c)) + " (slot holds another channel)");
    }
  }

  std::map<Channel, ValidatedSeries> gridded;
  Timestamp start = std::numeric_limits<Timestamp>::min();
  Timestamp end = std::numeric_limits<Timestamp>::max();
  for (Channel c : kAllChannels) {
    const ValidatedSeries& s = channels.at(c);
    detail::Coverage cov{};
    if (c == Channel::Calendar) {
      cov.start = local_day(s.points().front().time, utc_offset) * kSecondsPerDay - utc_offset;
      cov.end = (local_day(s.points().back().time, utc_offset) + 1) * kSecondsPerDay - utc_offset - grid_interval;
      gridded.emplace(c, s);
    } else {
      ValidatedSeries g = detail::to_grid(s, grid_interval);
      if (detail::known_points(g.points()).empty()) fail(ErrorCode::InsufficientKnownPoints, std::string(channel_name(c)));
      cov.start = g.points().front().time;
      cov.end = g.points().back().time;
      gridded.emplace(c, std::move(g));
    }
    start = std::max(start, cov.start);
    end = std::min(end, cov.end);
  }
  start = -floor_to(-start, grid_interval);  // ceil onto the grid
  end = floor_to(end, grid_interval);
  if (start > end) fail(ErrorCode::EmptyIntersection, "channel time spans do not overlap");

  AlignedDataset out;
  out.grid_interval = grid_interval;
  out.utc_offset = utc_offset;
  const auto n = static_cast<std::size_t>((end - start) / grid_interval + 1);
  out.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.rows[i].time = start + static_cast<Timestamp>(i) * grid_interval;

  for (std::size_t ci = 0; ci < kNumColumns; ++ci) {
    const Channel c = kAllChannels[ci];
    const auto known = detail::known_points(gridded.at(c).points());
    if (c == Channel::Calendar) {
      std::map<std::int64_t, double> by_day;
      for (const auto& p : known) by_day[local_day(p.time, utc_offset)] = *p.value;
      if (by_day.empty()) fail(ErrorCode::InsufficientKnownPoints, "calendar");
      for (auto& r : out.rows) {
        auto it = by_day.upper_bound(local_day(r.time, utc_offset));
        r.calendar = (it == by_day.begin()) ? it->second : std::prev(it)->second;
      }
      continue;
    }
    std::size_t hint = 0;
    for (auto& r : out.rows) row_value(r, ci) = detail::interpolate_known(known, r.time, hint);
  }
  return out;
}

inline constexpr std::string_view kFusedHeader = "timestamp,energy_wh,occupancy,temperature_c,humidity,calendar";

inline std::string serialize_fused(const AlignedDataset& d) {
  std::string out(kFusedHeader);
  out += '\n';
  for (const auto& r : d.rows) {
    out += format_timestamp(r.time);
    for (double v : row_values(r)) {
      out += ',';
      out += detail::format_double(v);
    }
    out += '\n';
  }
  return out;
}

/// Reads the fused-table CSV. The grid interval is inferred from the first gap
/// when not supplied (and defaults to 600 s for a single row).
inline AlignedDataset parse_fused(std::string_view text, std::int64_t utc_offset = 0, std::int64_t grid_interval = 0) {
  AlignedDataset out;
  out.utc_offset = utc_offset;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    const std::string_view line = detail::trim(text.substr(0, nl));
    text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kFusedHeader) fail(ErrorCode::FormatError, "unexpected fused header");
      header_seen = true;
      continue;
    }
    std::array<std::string_view, kNumColumns + 1> cells{};
    std::string_view rest = line;
    for (std::size_t i = 0; i <= kNumColumns; ++i) {
      const std::size_t comma = rest.find(',');
      if ((comma == std::string_view::npos) != (i == kNumColumns)) {
        fail(ErrorCode::FormatError, "line " + std::to_string(line_no) + ": expected 6 cells");
      }
      cells[i] = rest.substr(0, comma);
      rest = (comma == std::string_view::npos) ? std::string_view{} : rest.substr(comma + 1);
    }
    AlignedRow r;
    const auto ts = parse_timestamp(cells[0], utc_offset);
    if (!ts) fail(ErrorCode::MalformedTimestamp, "line " + std::to_string(line_no));
    r.time = *ts;
    for (std::size_t c = 0; c < kNumColumns; ++c) {
      const auto v = detail::parse_double(detail::trim(cells[c + 1]));
      if (!v) fail(ErrorCode::NonNumericValue, "line " + std::to_string(line_no));
      row_value(r, c) = *v;
    }
    out.rows.push_back(r);
  }
  if (out.rows.empty()) fail(ErrorCode::EmptyFile, "no data rows");
  if (grid_interval > 0) {
    out.grid_interval = grid_interval;
  } else if (out.rows.size() > 1) {
    out.grid_interval = out.rows[1].time - out.rows[0].time;
  }
  check_aligned(out);
  return out;
}

/// Contiguous row slice [begin, end) keeping grid metadata.
inline AlignedDataset slice_rows(const AlignedDataset& d, std::size_t begin, std::size_t end) {
  AlignedDataset out;
  out.grid_interval = d.grid_interval;
  out.utc_offset = d.utc_offset;
  out.rows.assign(d.rows.begin() + static_cast<std::ptrdiff_t>(begin), d.rows.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

}  // namespace bldgcast
