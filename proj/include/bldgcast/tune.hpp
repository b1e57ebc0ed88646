#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "bldgcast/error.hpp"
#include "bldgcast/eval.hpp"
#include "bldgcast/features.hpp"
#include "bldgcast/pipeline.hpp"
#include "bldgcast/rng.hpp"

namespace bldgcast {

struct IntRange {
  long long lo = 0;
  long long hi = 0;
};

/// Sampled log-uniformly; strictly positive bounds.
struct LogRange {
  double lo = 1.0;
  double hi = 1.0;
};

struct ValueSet {
  std::vector<double> values;
};

using Domain = std::variant<IntRange, LogRange, ValueSet>;
using SearchSpace = std::map<std::string, Domain>;

inline void check_space(const SearchSpace& space) {
  if (space.empty()) fail(ErrorCode::EmptySpace, "search space has no axes");
  for (const auto& [name, d] : space) {
    const bool ok = std::visit(
        [](const auto& dom) {
          using T = std::decay_t<decltype(dom)>;
          if constexpr (std::is_same_v<T, IntRange>) return dom.lo <= dom.hi;
          else if constexpr (std::is_same_v<T, LogRange>) return dom.lo > 0.0 && dom.lo <= dom.hi;
          else return !dom.values.empty();
        },
        d);
    if (!ok) fail(ErrorCode::EmptySpace, "axis '" + name + "' is empty or invalid");
  }
}

/// Search ranges explored for each model kind.
inline SearchSpace default_space(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ridge: return {{"alpha", LogRange{1e-3, 1e3}}};
    case ModelKind::Tree: return {{"max_depth", IntRange{1, 20}}, {"min_samples_split", IntRange{2, 30}}};
    case ModelKind::Forest: return {{"n_estimators", IntRange{10, 1000}}};
    case ModelKind::Lstm:
      return {{"units", IntRange{20, 100}},
              {"dense_units", IntRange{2, 10}},
              {"batch", ValueSet{{8, 16, 32, 64, 128, 256, 512}}},
              {"epochs", IntRange{1, 20}}};
  }
  return {};
}

struct TrialResult {
  ParamConfig config;
  double val_mae = 0.0;
  double train_seconds = 0.0;
  std::uint64_t seed = 0;
};

/// Validation MAE of one configuration trained with the given seed.
using Objective = std::function<double(const ParamConfig&, std::uint64_t)>;

/// Tie-break weight for equal scores: smaller means fewer fitted parameters.
using ComplexityFn = std::function<double(const ParamConfig&)>;

inline ComplexityFn complexity_for(const ModelSpec& base) {
  return [base](const ParamConfig& c) {
    const ModelSpec s = apply_params(base, c);
    switch (s.kind) {
      case ModelKind::Ridge: return 0.0;
      case ModelKind::Tree: return detail::depth_value(s.tree.max_depth);
      case ModelKind::Forest: return static_cast<double>(s.forest.n_estimators);
      case ModelKind::Lstm: return static_cast<double>(LstmLayout(s.lstm.shape).total);
    }
    return 0.0;
  };
}

/// Trains `base` with each config on the training split (fresh model per
/// trial) and scores validation MAE in normalized units.
inline Objective make_objective(const AlignedDataset& data, const ModelSpec& base) {
  return [&data, base](const ParamConfig& config, std::uint64_t seed) {
    ModelSpec spec = apply_params(base, config);
    spec.seed = seed;
    spec.lstm.seed = seed;
    const SplitIndices split = chronological_split(data, spec.split);
    if (split.val.size() == 0) fail(ErrorCode::TooFewRows, "validation split is empty");
    const auto trained = train_model(data, spec, split.train);
    const auto p = predict_rows(trained.artifact, data, split.val);
    return mae(p.actual, p.predicted);
  };
}

namespace detail {

inline void canonical_sort(std::vector<TrialResult>& trials, const ComplexityFn& complexity) {
  std::stable_sort(trials.begin(), trials.end(), [&](const TrialResult& a, const TrialResult& b) {
    if (a.val_mae != b.val_mae) return a.val_mae < b.val_mae;
    if (complexity) {
      const double ca = complexity(a.config), cb = complexity(b.config);
      if (ca != cb) return ca < cb;
    }
    return a.config < b.config;
  });
}

inline TrialResult run_trial(const Objective& objective, const ParamConfig& config, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const double score = objective(config, seed);
  const auto stop = std::chrono::steady_clock::now();
  if (!std::isfinite(score) || score < 0.0) fail(ErrorCode::DivergedTraining, "trial produced a non-finite score");
  return {config, score, std::chrono::duration<double>(stop - start).count(), seed};
}

}  // namespace detail

inline ParamConfig sample_config(const SearchSpace& space, std::mt19937_64& rng) {
  ParamConfig c;
  for (const auto& [name, d] : space) {
    c[name] = std::visit(
        [&](const auto& dom) -> double {
          using T = std::decay_t<decltype(dom)>;
          if constexpr (std::is_same_v<T, IntRange>) {
            return static_cast<double>(std::uniform_int_distribution<long long>(dom.lo, dom.hi)(rng));
          } else if constexpr (std::is_same_v<T, LogRange>) {
            return std::exp(std::uniform_real_distribution<double>(std::log(dom.lo), std::log(dom.hi))(rng));
          } else {
            return dom.values[std::uniform_int_distribution<std::size_t>(0, dom.values.size() - 1)(rng)];
          }
        },
        d);
  }
  return c;
}

/// `budget` uniformly sampled configs (log-uniform on log ranges), ranked by
/// validation MAE.
inline std::vector<TrialResult> random_search(const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                                              const Objective& objective, const ComplexityFn& complexity = {},
                                              std::uint64_t train_seed = kDefaultSeed) {
  check_space(space);
  if (budget == 0) fail(ErrorCode::InvalidConfig, "budget must be at least 1");
  std::mt19937_64 rng(derive_seed(seed, 2));
  std::vector<TrialResult> trials;
  for (std::size_t i = 0; i < budget; ++i) trials.push_back(detail::run_trial(objective, sample_config(space, rng), train_seed));
  detail::canonical_sort(trials, complexity);
  return trials;
}

struct RadiusSpec {
  std::size_t steps = 2;
  double log_factor = 2.0;                  // ratio between neighbors on log ranges
  std::map<std::string, long long> int_steps;  // spacing on integer ranges (default 1)
};

/// Finite grid around `center`: up to `steps` neighbors on each side of every
/// axis, clipped to the axis domain.
inline SearchSpace refine_grid(const SearchSpace& space, const ParamConfig& center, const RadiusSpec& radius = {}) {
  check_space(space);
  SearchSpace grid;
  const auto r = static_cast<long long>(radius.steps);
  for (const auto& [name, d] : space) {
    const auto it = center.find(name);
    if (it == center.end()) fail(ErrorCode::InvalidConfig, "center lacks axis '" + name + "'");
    const double c = it->second;
    ValueSet values;
    std::visit(
        [&](const auto& dom) {
          using T = std::decay_t<decltype(dom)>;
          if constexpr (std::is_same_v<T, IntRange>) {
            const auto step_it = radius.int_steps.find(name);
            const long long step = std::max(1LL, step_it == radius.int_steps.end() ? 1LL : step_it->second);
            const long long mid = std::clamp(std::llround(c), dom.lo, dom.hi);
            for (long long j = -r; j <= r; ++j) {
              const long long v = mid + j * step;
              if (v >= dom.lo && v <= dom.hi) values.values.push_back(static_cast<double>(v));
            }
          } else if constexpr (std::is_same_v<T, LogRange>) {
            const double mid = std::clamp(c, dom.lo, dom.hi);
            for (long long j = -r; j <= r; ++j) {
              const double v = mid * std::pow(radius.log_factor, static_cast<double>(j));
              if (v >= dom.lo * (1 - 1e-12) && v <= dom.hi * (1 + 1e-12)) values.values.push_back(v);
            }
          } else {
            std::vector<double> sorted = dom.values;
            std::sort(sorted.begin(), sorted.end());
            sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
            std::size_t idx = 0;
            for (std::size_t i = 1; i < sorted.size(); ++i) {
              if (std::abs(sorted[i] - c) < std::abs(sorted[idx] - c)) idx = i;
            }
            const auto n = static_cast<long long>(sorted.size());
            for (long long j = -r; j <= r; ++j) {
              const long long k = static_cast<long long>(idx) + j;
              if (k >= 0 && k < n) values.values.push_back(sorted[static_cast<std::size_t>(k)]);
            }
          }
        },
        d);
    grid[name] = std::move(values);
  }
  return grid;
}

/// Cartesian product of finite axes, in lexicographic axis order.
inline std::vector<ParamConfig> grid_points(const SearchSpace& grid) {
  if (grid.empty()) fail(ErrorCode::EmptyGrid, "grid has no axes");
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  for (const auto& [name, d] : grid) {
    std::vector<double> vals;
    if (const auto* s = std::get_if<ValueSet>(&d)) {
      vals = s->values;
    } else if (const auto* ir = std::get_if<IntRange>(&d)) {
      for (long long v = ir->lo; v <= ir->hi; ++v) vals.push_back(static_cast<double>(v));
    } else {
      fail(ErrorCode::InvalidConfig, "axis '" + name + "' is continuous; refine it into a grid first");
    }
    if (vals.empty()) fail(ErrorCode::EmptyGrid, "axis '" + name + "' has no values");
    axes.emplace_back(name, std::move(vals));
  }
  std::vector<ParamConfig> points{ParamConfig{}};
  for (const auto& [name, vals] : axes) {
    std::vector<ParamConfig> next;
    next.reserve(points.size() * vals.size());
    for (const auto& p : points) {
      for (double v : vals) {
        ParamConfig q = p;
        q[name] = v;
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

struct GridResult {
  TrialResult best;
  std::vector<TrialResult> table;  // canonical order, best first
};

/// Scores every grid point; the winner is the minimal validation MAE, ties
/// broken by lower complexity and then lexicographic config.
inline GridResult grid_search(const SearchSpace& grid, const Objective& objective, const ComplexityFn& complexity = {},
                              std::uint64_t train_seed = kDefaultSeed) {
  const auto points = grid_points(grid);
  GridResult out;
  for (const auto& p : points) out.table.push_back(detail::run_trial(objective, p, train_seed));
  detail::canonical_sort(out.table, complexity);
  out.best = out.table.front();
  return out;
}

struct TwoStageResult {
  std::vector<TrialResult> random;
  SearchSpace grid;
  GridResult refined;
};

/// Randomized exploration followed by a grid around the best random config.
inline TwoStageResult tune(const SearchSpace& space, std::size_t budget, std::uint64_t seed, const RadiusSpec& radius,
                           const Objective& objective, const ComplexityFn& complexity = {},
                           std::uint64_t train_seed = kDefaultSeed) {
  TwoStageResult r;
  r.random = random_search(space, budget, seed, objective, complexity, train_seed);
  r.grid = refine_grid(space, r.random.front().config, radius);
  r.refined = grid_search(r.grid, objective, complexity, train_seed);
  return r;
}

inline std::string config_json(const ParamConfig& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : c) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
      j[k] = static_cast<long long>(v);
    } else {
      j[k] = v;
    }
  }
  return j.dump();
}

namespace detail {

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// `rank,model,config_json,val_mae,train_seconds,seed`. Wall-clock timings
/// vary run to run, so they are written as 0 unless `with_timings` is set.
inline std::string trials_csv(const std::vector<TrialResult>& trials, ModelKind kind, bool with_timings = false) {
  std::string out = "rank,model,config_json,val_mae,train_seconds,seed\n";
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const auto& t = trials[i];
    out += std::to_string(i + 1) + "," + std::string(model_name(kind)) + "," + detail::csv_quote(config_json(t.config)) +
           "," + detail::format_double(t.val_mae) + "," + detail::format_double(with_timings ? t.train_seconds : 0.0) +
           "," + std::to_string(t.seed) + "\n";
  }
  return out;
}

}  // namespace bldgcast
