#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bldgcast/align.hpp"
#include "bldgcast/error.hpp"
#include "bldgcast/features.hpp"
#include "bldgcast/pipeline.hpp"

namespace bldgcast {

/// Coefficient of determination: 1 - SS_res / SS_tot.
inline double r2(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) fail(ErrorCode::LengthMismatch, "r2 inputs differ in length");
  if (y.size() < 2) fail(ErrorCode::ZeroVarianceTarget, "r2 needs at least two targets");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  if (ss_tot == 0.0) fail(ErrorCode::ZeroVarianceTarget, "targets are constant");
  return 1.0 - ss_res / ss_tot;
}

inline double mae(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) fail(ErrorCode::LengthMismatch, "mae inputs differ in length");
  if (y.empty()) fail(ErrorCode::EmptyInput, "mae of zero values");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

struct EvalEntry {
  std::string label;
  double r2 = 0.0;
  double mae_norm = 0.0;
  double mae_wh = 0.0;
  RowRange rows{};          // dataset rows the entry covers
  std::size_t samples = 0;  // predictions actually scored
};

struct EvalReport {
  std::vector<EvalEntry> entries;
  std::optional<EvalEntry> average;
};

/// Scores the predictions whose row lies in `rows`; MAE is reported both in
/// normalized units and converted back to Wh through the target scaler.
inline EvalEntry score_predictions(const PredictionSet& p, const NormalizationParams& norm, std::string label,
                                   RowRange rows) {
  std::vector<double> y, yhat;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (!rows.contains(p.rows[i])) continue;
    y.push_back(p.actual[i]);
    yhat.push_back(p.predicted[i]);
  }
  EvalEntry e;
  e.label = std::move(label);
  e.rows = rows;
  e.samples = y.size();
  e.r2 = r2(y, yhat);
  e.mae_norm = mae(y, yhat);
  e.mae_wh = e.mae_norm * norm.target.range();
  return e;
}

struct LabeledDays {
  std::string label;
  double days = 0.0;
};

/// 1 month = 30 days, 6 months = 182 days, 1 year = 365 days.
inline std::vector<LabeledDays> default_horizon_spans() {
  return {{"1 day", 1}, {"1 week", 7}, {"1 month", 30}, {"6 months", 182}, {"1 year", 365}};
}

inline std::vector<LabeledDays> default_training_lengths() {
  return {{"1 year", 365}, {"6 months", 182}, {"3 months", 90}, {"2 months", 60}, {"1 month", 30}};
}

inline std::size_t days_to_rows(double days, std::int64_t grid_interval) {
  return static_cast<std::size_t>(std::llround(days * static_cast<double>(kSecondsPerDay) / static_cast<double>(grid_interval)));
}

/// One entry per span, each scored on the first span-worth of test rows.
inline EvalReport horizon_report(const ModelArtifact& a, const AlignedDataset& data, RowRange test,
                                 const std::vector<LabeledDays>& spans = default_horizon_spans()) {
  std::vector<RowRange> ranges;
  for (const auto& s : spans) {
    const std::size_t n = days_to_rows(s.days, data.grid_interval);
    if (n == 0 || n > test.size()) {
      fail(ErrorCode::SpanExceedsData, s.label + " needs " + std::to_string(n) + " rows, test has " + std::to_string(test.size()));
    }
    ranges.push_back({test.begin, test.begin + n});
  }
  const PredictionSet p = predict_rows(a, data, test);
  EvalReport report;
  for (std::size_t i = 0; i < spans.size(); ++i) report.entries.push_back(score_predictions(p, a.norm, spans[i].label, ranges[i]));
  return report;
}

/// Retrains on the most recent `length` of rows before the validation split
/// and scores every variant on the same test split.
inline EvalReport ablation_report(const AlignedDataset& data, const std::vector<LabeledDays>& lengths, const ModelSpec& spec) {
  const SplitIndices split = chronological_split(data, spec.split);
  std::vector<RowRange> ranges;
  for (const auto& l : lengths) {
    const std::size_t n = days_to_rows(l.days, data.grid_interval);
    if (n == 0 || n > split.train.end) {
      fail(ErrorCode::LengthExceedsData, l.label + " needs " + std::to_string(n) + " rows, " +
                                             std::to_string(split.train.end) + " precede validation");
    }
    ranges.push_back({split.train.end - n, split.train.end});
  }
  EvalReport report;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const auto trained = train_model(data, spec, ranges[i]);
    const auto p = predict_rows(trained.artifact, data, split.test);
    auto e = score_predictions(p, trained.artifact.norm, lengths[i].label, split.test);
    e.rows = ranges[i];
    report.entries.push_back(std::move(e));
  }
  return report;
}

struct NamedDataset {
  std::string name;
  AlignedDataset data;
};

/// Per-building train/test run plus the arithmetic mean of every metric.
inline EvalReport building_report(const std::vector<NamedDataset>& buildings, const ModelSpec& spec) {
  EvalReport report;
  for (const auto& b : buildings) {
    const SplitIndices split = chronological_split(b.data, spec.split);
    const auto trained = train_model(b.data, spec, split.train);
    const auto p = predict_rows(trained.artifact, b.data, split.test);
    report.entries.push_back(score_predictions(p, trained.artifact.norm, b.name, split.test));
  }
  if (!report.entries.empty()) {
    EvalEntry avg;
    avg.label = "Average";
    for (const auto& e : report.entries) {
      avg.r2 += e.r2;
      avg.mae_norm += e.mae_norm;
      avg.mae_wh += e.mae_wh;
      avg.samples += e.samples;
    }
    const auto n = static_cast<double>(report.entries.size());
    avg.r2 /= n;
    avg.mae_norm /= n;
    avg.mae_wh /= n;
    report.average = avg;
  }
  return report;
}

struct OverlayRow {
  Timestamp time = 0;
  double actual_wh = 0.0;
  double predicted_wh = 0.0;
};

/// First `k` predictable test rows with raw actual energy and the de-normalized
/// prediction.
inline std::vector<OverlayRow> forecast_overlay(const ModelArtifact& a, const AlignedDataset& data, RowRange test,
                                                std::size_t k = 300) {
  if (k == 0 || k > test.size()) {
    fail(ErrorCode::KTooLarge, std::to_string(k) + " rows requested, test has " + std::to_string(test.size()));
  }
  const PredictionSet p = predict_rows(a, data, test);
  if (p.rows.size() < k) fail(ErrorCode::KTooLarge, "only " + std::to_string(p.rows.size()) + " predictable test rows");
  std::vector<OverlayRow> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const AlignedRow& r = data.rows[p.rows[i]];
    out.push_back({r.time, r.energy, a.norm.target.unscale(p.predicted[i])});
  }
  return out;
}

inline std::string report_csv(const EvalReport& r) {
  std::string out = "label,r2,mae_norm,mae_wh\n";
  auto line = [&](const EvalEntry& e) {
    out += e.label + "," + detail::format_double(e.r2) + "," + detail::format_double(e.mae_norm) + "," +
           detail::format_double(e.mae_wh) + "\n";
  };
  for (const auto& e : r.entries) line(e);
  if (r.average) line(*r.average);
  return out;
}

inline std::string overlay_csv(const std::vector<OverlayRow>& rows) {
  std::string out = "timestamp,actual_wh,predicted_wh\n";
  for (const auto& r : rows) {
    out += format_timestamp(r.time) + "," + detail::format_double(r.actual_wh) + "," +
           detail::format_double(r.predicted_wh) + "\n";
  }
  return out;
}

struct MaeBar {
  std::string building;
  std::string model;
  double mae_norm = 0.0;
};

inline std::string mae_bars_csv(const std::vector<MaeBar>& bars) {
  std::string out = "building,model,mae_norm\n";
  for (const auto& b : bars) out += b.building + "," + b.model + "," + detail::format_double(b.mae_norm) + "\n";
  return out;
}

}  // namespace bldgcast
