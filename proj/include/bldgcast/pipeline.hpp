#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bldgcast/align.hpp"
#include "bldgcast/error.hpp"
#include "bldgcast/features.hpp"
#include "bldgcast/models/forest.hpp"
#include "bldgcast/models/lstm.hpp"
#include "bldgcast/models/ridge.hpp"
#include "bldgcast/models/tree.hpp"
#include "bldgcast/rng.hpp"

namespace bldgcast {

enum class ModelKind : std::uint8_t { Ridge = 0, Tree = 1, Forest = 2, Lstm = 3 };

constexpr std::string_view model_name(ModelKind k) {
  switch (k) {
    case ModelKind::Ridge: return "ridge";
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Lstm: return "lstm";
  }
  return "unknown";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view name) {
  for (auto k : {ModelKind::Ridge, ModelKind::Tree, ModelKind::Forest, ModelKind::Lstm}) {
    if (model_name(k) == name) return k;
  }
  if (name == "linear") return ModelKind::Ridge;
  return std::nullopt;
}

/// Everything needed to rebuild features and retrain a model.
struct ModelSpec {
  ModelKind kind = ModelKind::Lstm;
  std::uint64_t seed = kDefaultSeed;
  SplitRatios split{};
  std::size_t window = 6;  // LSTM input steps
  std::size_t lags = 3;    // same-type days of lagged energy for tabular models
  double alpha = 1.0;
  TreeConfig tree{14, 20, 0};
  ForestConfig forest{500, true, 0, TreeConfig{}};
  LstmTrainConfig lstm{};

  bool operator==(const ModelSpec& o) const {
    return kind == o.kind && seed == o.seed && split.train == o.split.train && split.val == o.split.val &&
           split.test == o.split.test && window == o.window && lags == o.lags && alpha == o.alpha &&
           tree == o.tree && forest == o.forest && lstm == o.lstm;
  }
};

inline ModelSpec default_spec(ModelKind kind) {
  ModelSpec s;
  s.kind = kind;
  return s;
}

/// Hyperparameter assignment by name, as used by configs and the tuner.
using ParamConfig = std::map<std::string, double>;

namespace detail {

inline std::size_t as_count(const std::string& name, double v) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15) fail(ErrorCode::InvalidConfig, name + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline std::size_t as_depth(const std::string& name, double v) {
  const std::size_t d = as_count(name, v);
  return d == 0 ? kUnlimitedDepth : d;
}

inline double depth_value(std::size_t d) { return d == kUnlimitedDepth ? 0.0 : static_cast<double>(d); }

}  // namespace detail

inline bool is_param_name(std::string_view name) {
  static constexpr std::string_view kNames[] = {
      "alpha", "max_depth", "min_samples_split", "max_features", "n_estimators", "bootstrap", "units", "dense_units",
      "batch", "epochs",    "learning_rate",     "rho",          "epsilon",      "window",    "lags",  "seed"};
  return std::find(std::begin(kNames), std::end(kNames), name) != std::end(kNames);
}

/// Sets one named hyperparameter. `max_depth`, `min_samples_split` and
/// `max_features` address the tree model or the forest's trees depending on
/// the ModelSpec's kind; depth 0 means unlimited.
inline void set_param(ModelSpec& s, const std::string& name, double v) {
  using detail::as_count;
  TreeConfig& tree = (s.kind == ModelKind::Forest) ? s.forest.tree : s.tree;
  if (name == "alpha") {
    if (!(v >= 0.0)) fail(ErrorCode::InvalidConfig, "alpha must be non-negative");
    s.alpha = v;
  } else if (name == "max_depth") {
    tree.max_depth = detail::as_depth(name, v);
  } else if (name == "min_samples_split") {
    tree.min_samples_split = as_count(name, v);
  } else if (name == "max_features") {
    if (s.kind == ModelKind::Forest) {
      s.forest.max_features = as_count(name, v);
    } else {
      tree.max_features = as_count(name, v);
    }
  } else if (name == "n_estimators") {
    s.forest.n_estimators = as_count(name, v);
  } else if (name == "bootstrap") {
    s.forest.bootstrap = v != 0.0;
  } else if (name == "units") {
    s.lstm.shape.hidden = as_count(name, v);
  } else if (name == "dense_units") {
    s.lstm.shape.dense = as_count(name, v);
  } else if (name == "batch") {
    s.lstm.batch = as_count(name, v);
  } else if (name == "epochs") {
    s.lstm.epochs = as_count(name, v);
  } else if (name == "learning_rate") {
    s.lstm.learning_rate = v;
  } else if (name == "rho") {
    s.lstm.rho = v;
  } else if (name == "epsilon") {
    s.lstm.epsilon = v;
  } else if (name == "window") {
    s.window = as_count(name, v);
  } else if (name == "lags") {
    s.lags = as_count(name, v);
  } else if (name == "seed") {
    s.seed = static_cast<std::uint64_t>(as_count(name, v));
    s.lstm.seed = s.seed;
  } else {
    fail(ErrorCode::InvalidConfig, "unknown hyperparameter '" + name + "'");
  }
}

inline ModelSpec apply_params(ModelSpec s, const ParamConfig& params) {
  for (const auto& [k, v] : params) set_param(s, k, v);
  return s;
}

/// The hyperparameters that matter for the ModelSpec's kind.
inline ParamConfig relevant_params(const ModelSpec& s) {
  const TreeConfig& tree = (s.kind == ModelKind::Forest) ? s.forest.tree : s.tree;
  switch (s.kind) {
    case ModelKind::Ridge: return {{"alpha", s.alpha}, {"lags", double(s.lags)}};
    case ModelKind::Tree:
      return {{"max_depth", detail::depth_value(tree.max_depth)},
              {"min_samples_split", double(tree.min_samples_split)},
              {"lags", double(s.lags)}};
    case ModelKind::Forest:
      return {{"n_estimators", double(s.forest.n_estimators)},
              {"max_depth", detail::depth_value(tree.max_depth)},
              {"min_samples_split", double(tree.min_samples_split)},
              {"max_features", double(s.forest.max_features)},
              {"bootstrap", s.forest.bootstrap ? 1.0 : 0.0},
              {"lags", double(s.lags)}};
    case ModelKind::Lstm:
      return {{"units", double(s.lstm.shape.hidden)},   {"dense_units", double(s.lstm.shape.dense)},
              {"batch", double(s.lstm.batch)},          {"epochs", double(s.lstm.epochs)},
              {"learning_rate", s.lstm.learning_rate},  {"rho", s.lstm.rho},
              {"epsilon", s.lstm.epsilon},              {"window", double(s.window)}};
  }
  return {};
}

inline nlohmann::json spec_to_json(const ModelSpec& s) {
  using nlohmann::json;
  return json{
      {"model", std::string(model_name(s.kind))},
      {"seed", s.seed},
      {"split", {s.split.train, s.split.val, s.split.test}},
      {"window", s.window},
      {"lags", s.lags},
      {"ridge", {{"alpha", s.alpha}}},
      {"tree",
       {{"max_depth", detail::depth_value(s.tree.max_depth)},
        {"min_samples_split", s.tree.min_samples_split},
        {"max_features", s.tree.max_features}}},
      {"forest",
       {{"n_estimators", s.forest.n_estimators},
        {"bootstrap", s.forest.bootstrap ? 1 : 0},
        {"max_features", s.forest.max_features},
        {"max_depth", detail::depth_value(s.forest.tree.max_depth)},
        {"min_samples_split", s.forest.tree.min_samples_split}}},
      {"lstm",
       {{"units", s.lstm.shape.hidden},
        {"dense_units", s.lstm.shape.dense},
        {"batch", s.lstm.batch},
        {"epochs", s.lstm.epochs},
        {"learning_rate", s.lstm.learning_rate},
        {"rho", s.lstm.rho},
        {"epsilon", s.lstm.epsilon}}},
  };
}

/// Reads a spec; absent keys keep their defaults. Accepts the nested layout
/// written by `spec_to_json` and flat hyperparameter keys at top level.
inline ModelSpec spec_from_json(const nlohmann::json& j, ModelSpec s = {}) {
  try {
    if (j.contains("model")) {
      const auto kind = parse_model_kind(j.at("model").get<std::string>());
      if (!kind) fail(ErrorCode::InvalidConfig, "unknown model '" + j.at("model").get<std::string>() + "'");
      s.kind = *kind;
    }
    if (j.contains("split")) {
      const auto r = j.at("split").get<std::vector<double>>();
      if (r.size() != 3) fail(ErrorCode::InvalidConfig, "split needs three ratios");
      s.split = {r[0], r[1], r[2]};
      if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) fail(ErrorCode::InvalidConfig, "split ratios must sum to 1");
    }
    const ModelKind kind = s.kind;
    auto apply_block = [&](const char* block, ModelKind as) {
      if (!j.contains(block)) return;
      s.kind = as;
      for (const auto& [k, v] : j.at(block).items()) set_param(s, k, v.get<double>());
      s.kind = kind;
    };
    apply_block("lstm", ModelKind::Lstm);
    apply_block("ridge", ModelKind::Ridge);
    apply_block("tree", ModelKind::Tree);
    apply_block("forest", ModelKind::Forest);
    for (const auto& [k, v] : j.items()) {
      if (k == "model" || k == "split" || k == "lstm" || k == "ridge" || k == "tree" || k == "forest") continue;
      if (!v.is_number() || !is_param_name(k)) continue;
      if (k == "seed" && v.is_number_unsigned()) {
        s.seed = s.lstm.seed = v.get<std::uint64_t>();
        continue;
      }
      set_param(s, k, v.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidConfig, e.what());
  }
  return s;
}

using TrainedModel = std::variant<RidgeModel, DecisionTree, RandomForest, LstmModel>;

/// A trained model together with the scaler and spec that produced it.
struct ModelArtifact {
  ModelSpec spec;
  NormalizationParams norm;
  TrainedModel model;

  ModelKind kind() const noexcept { return spec.kind; }
  bool operator==(const ModelArtifact&) const = default;
};

struct TrainOutcome {
  ModelArtifact artifact;
  std::vector<double> loss_history;  // LSTM only
};

/// Model inputs and normalized targets for a set of dataset rows.
struct PredictionSet {
  std::vector<std::size_t> rows;
  std::vector<double> actual;     // normalized
  std::vector<double> predicted;  // normalized
};

/// Fits the scaler on `train_rows`, builds features on the normalized data
/// and trains the ModelSpec's model on samples whose target lies in `train_rows`.
inline TrainOutcome train_model(const AlignedDataset& data, const ModelSpec& spec, RowRange train_rows) {
  if (train_rows.size() == 0 || train_rows.end > data.size()) fail(ErrorCode::EmptyDataset, "empty training range");
  TrainOutcome out;
  out.artifact.spec = spec;
  out.artifact.norm = fit_scaler(slice_rows(data, train_rows.begin, train_rows.end));
  const AlignedDataset normalized = transform(data, out.artifact.norm);

  if (spec.kind == ModelKind::Lstm) {
    const auto train = select_targets(windowize(normalized, spec.window), {train_rows.begin + spec.window, train_rows.end});
    LstmTrainConfig cfg = spec.lstm;
    cfg.seed = spec.seed;
    auto result = train_lstm(train, cfg);
    out.loss_history = std::move(result.loss_history);
    out.artifact.model = std::move(result.model);
    return out;
  }

  const auto table = select_rows(lag_features(normalized, spec.lags), train_rows);
  if (table.size() == 0) fail(ErrorCode::InsufficientHistory, "no training row has enough lag history");
  switch (spec.kind) {
    case ModelKind::Ridge: out.artifact.model = ridge_fit(table.features, table.target, spec.alpha); break;
    case ModelKind::Tree: out.artifact.model = tree_fit(table.features, table.target, spec.tree); break;
    case ModelKind::Forest: out.artifact.model = forest_fit(table.features, table.target, spec.forest, spec.seed); break;
    case ModelKind::Lstm: break;
  }
  return out;
}

/// Normalized predictions for every row in `rows` that has the inputs the
/// model needs (a full window or a full set of lags).
inline PredictionSet predict_rows(const ModelArtifact& a, const AlignedDataset& data, RowRange rows) {
  const AlignedDataset normalized = transform(data, a.norm);
  PredictionSet out;
  if (a.kind() == ModelKind::Lstm) {
    const auto& m = std::get<LstmModel>(a.model);
    const auto seq = select_targets(windowize(normalized, a.spec.window), rows);
    out.rows = seq.target_rows;
    out.actual = seq.targets;
    out.predicted = lstm_predict(m, seq);
    return out;
  }
  const auto table = select_rows(lag_features(normalized, a.spec.lags), rows);
  out.rows = table.source_rows;
  out.actual = table.target;
  if (table.size() == 0) return out;
  switch (a.kind()) {
    case ModelKind::Ridge: out.predicted = ridge_predict(std::get<RidgeModel>(a.model), table.features); break;
    case ModelKind::Tree: out.predicted = tree_predict(std::get<DecisionTree>(a.model), table.features); break;
    case ModelKind::Forest: out.predicted = forest_predict(std::get<RandomForest>(a.model), table.features); break;
    case ModelKind::Lstm: break;
  }
  return out;
}

/// Validates and fuses raw channels in one step.
inline AlignedDataset fuse_channels(const std::map<Channel, RawSeries>& raw, std::int64_t grid = kDefaultGridSeconds,
                                    std::int64_t utc_offset = 0) {
  std::map<Channel, ValidatedSeries> validated;
  for (const auto& [c, s] : raw) validated.emplace(c, validate_series(s));
  return fuse(validated, grid, utc_offset);
}

}  // namespace bldgcast
