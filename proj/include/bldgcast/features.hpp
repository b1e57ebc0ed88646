#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "bldgcast/align.hpp"
#include "bldgcast/error.hpp"
#include "bldgcast/linalg.hpp"

namespace bldgcast {

struct MinMax {
  double min = 0.0;
  double max = 0.0;

  double scale(double x) const noexcept { return (max == min) ? 0.0 : (x - min) / (max - min); }
  double unscale(double x) const noexcept { return (max == min) ? min : x * (max - min) + min; }
  double range() const noexcept { return max - min; }
  bool operator==(const MinMax&) const = default;
};

/// Min-max parameters per column (energy, occupancy, temperature, humidity,
/// calendar) plus the target, which is energy.
struct NormalizationParams {
  std::array<MinMax, kNumColumns> columns{};
  MinMax target{};

  bool operator==(const NormalizationParams&) const = default;
};

/// Fit on the training slice only; val/test values may then land outside [0, 1].
inline NormalizationParams fit_scaler(const AlignedDataset& train) {
  if (train.rows.empty()) fail(ErrorCode::EmptyInput, "cannot fit a scaler on zero rows");
  NormalizationParams p;
  for (std::size_t c = 0; c < kNumColumns; ++c) {
    p.columns[c].min = std::numeric_limits<double>::infinity();
    p.columns[c].max = -std::numeric_limits<double>::infinity();
  }
  for (const auto& r : train.rows) {
    const auto v = row_values(r);
    for (std::size_t c = 0; c < kNumColumns; ++c) {
      p.columns[c].min = std::min(p.columns[c].min, v[c]);
      p.columns[c].max = std::max(p.columns[c].max, v[c]);
    }
  }
  p.target = p.columns[0];
  return p;
}

inline AlignedDataset transform(const AlignedDataset& d, const NormalizationParams& p) {
  AlignedDataset out = d;
  for (auto& r : out.rows) {
    for (std::size_t c = 0; c < kNumColumns; ++c) row_value(r, c) = p.columns[c].scale(row_value(r, c));
  }
  return out;
}

inline AlignedDataset inverse_transform(const AlignedDataset& d, const NormalizationParams& p) {
  AlignedDataset out = d;
  for (auto& r : out.rows) {
    for (std::size_t c = 0; c < kNumColumns; ++c) row_value(r, c) = p.columns[c].unscale(row_value(r, c));
  }
  return out;
}

struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
  bool operator==(const RowRange&) const = default;
};

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

struct SplitIndices {
  RowRange train;
  RowRange val;
  RowRange test;
  bool empty_validation = false;
};

/// Train and validation sizes are floor(ratio * n); test takes the remainder.
inline SplitIndices chronological_split(std::size_t n, SplitRatios ratios = {}) {
  if (n < 3) fail(ErrorCode::TooFewRows, std::to_string(n) + " rows");
  if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidConfig, "split ratios must be non-negative and sum to 1");
  }
  const auto dn = static_cast<double>(n);
  // the epsilon absorbs representation error in products like 0.7 * 100
  const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * dn + 1e-9));
  const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::floor(ratios.val * dn + 1e-9)));
  SplitIndices s;
  s.train = {0, n_train};
  s.val = {n_train, n_train + n_val};
  s.test = {n_train + n_val, n};
  s.empty_validation = n_val == 0;
  return s;
}

inline SplitIndices chronological_split(const AlignedDataset& d, SplitRatios ratios = {}) {
  return chronological_split(d.size(), ratios);
}

/// Tabular rows for the shallow models: current occupancy, temperature,
/// humidity and calendar, then `lags` energies from earlier same-type days at
/// the same clock time (most recent first).
struct SupervisedTable {
  std::vector<std::string> feature_names;
  Matrix features;
  std::vector<double> target;
  std::vector<std::size_t> source_rows;
  /// rows() x lags matrix of dataset row indices the lag values came from.
  std::vector<std::size_t> lag_sources;
  std::size_t lags = 0;

  std::size_t size() const noexcept { return target.size(); }
};

inline SupervisedTable lag_features(const AlignedDataset& d, std::size_t k = 3) {
  if (k == 0) fail(ErrorCode::InvalidConfig, "lag count must be at least 1");
  if (d.grid_interval <= 0 || kSecondsPerDay % d.grid_interval != 0) {
    fail(ErrorCode::IncompatibleInterval, "grid interval must divide one day");
  }
  const auto rows_per_day = static_cast<std::size_t>(kSecondsPerDay / d.grid_interval);

  SupervisedTable t;
  t.lags = k;
  t.feature_names = {"occupancy", "temperature", "humidity", "calendar"};
  for (std::size_t j = 1; j <= k; ++j) t.feature_names.push_back("energy_lag" + std::to_string(j));

  std::vector<double> features(4 + k);
  std::vector<std::size_t> sources;
  sources.reserve(k);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const AlignedRow& r = d.rows[i];
    sources.clear();
    // a regular grid puts the same clock time exactly rows_per_day rows back
    for (std::size_t back = rows_per_day; back <= i && sources.size() < k; back += rows_per_day) {
      const std::size_t candidate = i - back;
      if (d.rows[candidate].calendar == r.calendar) sources.push_back(candidate);
    }
    if (sources.size() < k) continue;
    features[0] = r.occupancy;
    features[1] = r.temperature;
    features[2] = r.humidity;
    features[3] = r.calendar;
    for (std::size_t j = 0; j < k; ++j) features[4 + j] = d.rows[sources[j]].energy;
    t.features.append_row(features);
    t.target.push_back(r.energy);
    t.source_rows.push_back(i);
    t.lag_sources.insert(t.lag_sources.end(), sources.begin(), sources.end());
  }
  if (t.target.empty()) fail(ErrorCode::InsufficientHistory, "no row has " + std::to_string(k) + " same-type prior days");
  return t;
}

/// Rows of `t` whose source row lies in `range`.
inline SupervisedTable select_rows(const SupervisedTable& t, RowRange range) {
  SupervisedTable out;
  out.feature_names = t.feature_names;
  out.lags = t.lags;
  out.features = Matrix(0, t.features.cols());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!range.contains(t.source_rows[i])) continue;
    out.features.append_row(t.features.row(i));
    out.target.push_back(t.target[i]);
    out.source_rows.push_back(t.source_rows[i]);
    out.lag_sources.insert(out.lag_sources.end(), t.lag_sources.begin() + static_cast<std::ptrdiff_t>(i * t.lags),
                           t.lag_sources.begin() + static_cast<std::ptrdiff_t>((i + 1) * t.lags));
  }
  return out;
}

/// Fixed-length windows of consecutive 5-feature rows; each sample's target is
/// the energy of the row right after its window.
struct SequenceDataset {
  std::size_t window = 0;
  std::size_t features = kNumColumns;
  /// samples x window x features, row-major.
  std::vector<double> sequences;
  std::vector<double> targets;
  std::vector<std::size_t> target_rows;

  std::size_t size() const noexcept { return targets.size(); }
  std::span<const double> sequence(std::size_t i) const noexcept {
    return {sequences.data() + i * window * features, window * features};
  }
};

inline SequenceDataset windowize(const AlignedDataset& d, std::size_t window) {
  if (window == 0 || d.size() <= window) {
    fail(ErrorCode::WindowTooLong, "window " + std::to_string(window) + " for " + std::to_string(d.size()) + " rows");
  }
  SequenceDataset s;
  s.window = window;
  const std::size_t n = d.size() - window;
  s.sequences.reserve(n * window * kNumColumns);
  s.targets.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t w = 0; w < window; ++w) {
      const auto v = row_values(d.rows[i + w]);
      s.sequences.insert(s.sequences.end(), v.begin(), v.end());
    }
    s.targets.push_back(d.rows[i + window].energy);
    s.target_rows.push_back(i + window);
  }
  return s;
}

/// Samples whose target row lies in `range`.
inline SequenceDataset select_targets(const SequenceDataset& s, RowRange range) {
  SequenceDataset out;
  out.window = s.window;
  out.features = s.features;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!range.contains(s.target_rows[i])) continue;
    const auto seq = s.sequence(i);
    out.sequences.insert(out.sequences.end(), seq.begin(), seq.end());
    out.targets.push_back(s.targets[i]);
    out.target_rows.push_back(s.target_rows[i]);
  }
  return out;
}

/// Pearson correlation; NaN when either input has zero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::LengthMismatch, "pearson inputs differ in length");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct NamedColumn {
  std::string name;
  std::vector<double> values;
};

struct FeatureScore {
  std::string feature;
  double score = 0.0;
};

/// Score reported for a perfectly correlated feature.
inline constexpr double kPerfectScore = std::numeric_limits<double>::max();

/// Univariate F-statistic r^2 (n - 2) / (1 - r^2) against the target, sorted
/// descending (stable on input order). Constant features score 0.
inline std::vector<FeatureScore> feature_scores(const std::vector<NamedColumn>& features, std::span<const double> target) {
  const std::size_t n = target.size();
  if (n < 3) fail(ErrorCode::TooFewRows, "feature scoring needs at least 3 rows");
  const auto [lo, hi] = std::minmax_element(target.begin(), target.end());
  if (*lo == *hi) fail(ErrorCode::ZeroVarianceTarget, "target is constant");
  std::vector<FeatureScore> out;
  for (const auto& f : features) {
    const double r = pearson(f.values, target);
    double score = 0.0;
    if (!std::isnan(r)) {
      const double r2 = r * r;
      score = (r2 >= 1.0 - 1e-15) ? kPerfectScore : r2 * static_cast<double>(n - 2) / (1.0 - r2);
    }
    out.push_back({f.name, score});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  return out;
}

inline std::vector<NamedColumn> exogenous_columns(const AlignedDataset& d) {
  std::vector<NamedColumn> cols;
  for (std::size_t c = 1; c < kNumColumns; ++c) cols.push_back({std::string(kColumnNames[c]), column(d, c)});
  return cols;
}

/// Scores occupancy, temperature, humidity and calendar against energy.
inline std::vector<FeatureScore> feature_scores(const AlignedDataset& d) {
  return feature_scores(exogenous_columns(d), column(d, 0));
}

struct FeatureCorrelation {
  std::string feature;
  double r = 0.0;
};

inline std::vector<FeatureCorrelation> correlations(const std::vector<NamedColumn>& features,
                                                    std::span<const double> target) {
  if (target.size() < 3) fail(ErrorCode::TooFewRows, "correlation needs at least 3 rows");
  const auto [lo, hi] = std::minmax_element(target.begin(), target.end());
  if (*lo == *hi) fail(ErrorCode::ZeroVariance, "energy");
  std::vector<FeatureCorrelation> out;
  for (const auto& f : features) {
    const double r = pearson(f.values, target);
    if (std::isnan(r)) fail(ErrorCode::ZeroVariance, f.name);
    out.push_back({f.name, r});
  }
  return out;
}

inline std::vector<FeatureCorrelation> correlations(const AlignedDataset& d) {
  return correlations(exogenous_columns(d), column(d, 0));
}

inline std::string scores_csv(const std::vector<FeatureScore>& scores) {
  std::string out = "feature,score\n";
  for (const auto& s : scores) out += s.feature + "," + detail::format_double(s.score) + "\n";
  return out;
}

inline std::string correlations_csv(const std::vector<FeatureCorrelation>& rs) {
  std::string out = "feature,r\n";
  for (const auto& c : rs) out += c.feature + "," + detail::format_double(c.r) + "\n";
  return out;
}

}  // namespace bldgcast
