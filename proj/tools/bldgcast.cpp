// bldgcast: command-line front end for the forecasting pipeline.
//
//   bldgcast synth    --profile academic --days 180 --out data/
//   bldgcast fuse     --input-dir data/ --out fused/
//   bldgcast train    --data fused/fused.csv --model lstm --out run/
//   bldgcast tune     --data fused/fused.csv --model tree --budget 20 --out tune/
//   bldgcast evaluate --data fused/fused.csv --model-file run/model.decm --out eval/
//   bldgcast ablate   --data fused/fused.csv --model ridge --out ablate/
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error,
// 3 training divergence.

#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "bldgcast/bldgcast.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace bldgcast;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDiverged = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Collects outputs and the manifest for one command run. Every file goes
/// through a temporary name and a rename so readers never see partial data.
class Run {
 public:
  Run(std::string command, fs::path out) : command_(std::move(command)), out_(std::move(out)) {}

  std::string input(const std::string& path) {
    std::string bytes = read_file(path);
    inputs_.push_back({{"path", path}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}});
    return bytes;
  }

  void write(const std::string& name, const std::string& bytes) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    const fs::path target = out_ / name;
    const fs::path tmp = out_ / (name + ".tmp");
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      if (!f) fail(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
      f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!f) fail(ErrorCode::Io, "short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target, ec);
    if (ec) fail(ErrorCode::Io, "cannot move output into place: " + ec.message());
    outputs_.push_back({{"file", name}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a(bytes))}});
  }

  void finish(const json& config, std::uint64_t seed) {
    json m = {{"command", command_}, {"seed", seed}, {"config", config}, {"inputs", inputs_}, {"outputs", outputs_}};
    write("run_manifest.json", m.dump(2) + "\n");
  }

 private:
  std::string command_;
  fs::path out_;
  json inputs_ = json::array();
  json outputs_ = json::array();
};

/// Options shared by every subcommand plus the values read from --config.
struct Common {
  std::string config_path;
  std::uint64_t seed = kDefaultSeed;
  std::string out = ".";
  std::int64_t utc_offset = 0;
  json file = json::object();
  CLI::Option* seed_opt = nullptr;
  CLI::Option* offset_opt = nullptr;

  void load() {
    if (config_path.empty()) return;
    file = json::parse(read_file(config_path), nullptr, false);
    if (file.is_discarded() || !file.is_object()) throw UsageError("config '" + config_path + "' is not a JSON object");
    if (!seed_opt->count() && file.contains("seed")) seed = file.at("seed").get<std::uint64_t>();
    if (!offset_opt->count() && file.contains("utc_offset")) utc_offset = file.at("utc_offset").get<std::int64_t>();
  }

  template <class T>
  T pick(const CLI::Option* flag, const T& flag_value, const char* key, const T& fallback) const {
    if (flag && flag->count()) return flag_value;
    if (file.contains(key)) return file.at(key).get<T>();
    return fallback;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "random seed (default 42)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--utc-offset", c.utc_offset, "seconds east of UTC for naive local timestamps");
}

/// Hyperparameter flags mapped onto ModelSpec parameter names.
struct ModelFlags {
  std::string model;
  CLI::Option* model_opt = nullptr;
  std::map<std::string, double> values;
  std::map<std::string, CLI::Option*> opts;
  std::vector<std::string> sets;

  void add(CLI::App* app) {
    model_opt = app->add_option("--model", model, "ridge | tree | forest | lstm");
    const std::pair<const char*, const char*> flags[] = {
        {"--alpha", "alpha"},         {"--max-depth", "max_depth"},   {"--min-samples-split", "min_samples_split"},
        {"--n-estimators", "n_estimators"}, {"--max-features", "max_features"}, {"--units", "units"},
        {"--dense-units", "dense_units"}, {"--batch", "batch"},       {"--epochs", "epochs"},
        {"--learning-rate", "learning_rate"}, {"--window", "window"}, {"--lags", "lags"}};
    for (const auto& [flag, name] : flags) {
      values[name] = 0.0;
      opts[name] = app->add_option(flag, values[name], std::string("hyperparameter ") + name);
    }
    app->add_option("--set", sets, "extra hyperparameter as NAME=VALUE (repeatable)");
  }

  ModelSpec resolve(const Common& c) const {
    std::string kind_name = c.pick<std::string>(model_opt, model, "model", "lstm");
    const auto kind = parse_model_kind(kind_name);
    if (!kind) throw UsageError("unknown model '" + kind_name + "'");
    json body = c.file;
    body.erase("model");
    ModelSpec s = spec_from_json(body, default_spec(*kind));
    for (const auto& [name, opt] : opts) {
      if (opt->count()) set_param(s, name, values.at(name));
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      const auto v = eq == std::string::npos ? std::nullopt : detail::parse_double(kv.substr(eq + 1));
      if (!v) throw UsageError("--set expects NAME=VALUE, got '" + kv + "'");
      set_param(s, kv.substr(0, eq), *v);
    }
    s.seed = c.seed;
    s.lstm.seed = c.seed;
    return s;
  }
};

AlignedDataset load_fused(Run& run, const Common& c, const CLI::Option* flag, const std::string& path_flag) {
  const std::string path = c.pick<std::string>(flag, path_flag, "data", "");
  if (path.empty()) throw UsageError("a fused dataset is required (--data or \"data\" in the config)");
  return parse_fused(run.input(path), c.utc_offset);
}

std::string log_csv(const std::vector<double>& history) {
  std::string out = "epoch,train_mae\n";
  for (std::size_t i = 0; i < history.size(); ++i) out += std::to_string(i + 1) + "," + detail::format_double(history[i]) + "\n";
  return out;
}

std::vector<LabeledDays> parse_days(const std::vector<std::string>& items) {
  std::vector<LabeledDays> out;
  for (const auto& s : items) {
    const auto eq = s.find('=');
    const std::string label = eq == std::string::npos ? s + " days" : s.substr(0, eq);
    const auto v = detail::parse_double(eq == std::string::npos ? s : s.substr(eq + 1));
    if (!v || *v <= 0) throw UsageError("expected DAYS or LABEL=DAYS, got '" + s + "'");
    out.push_back({label, *v});
  }
  return out;
}

// ---------------------------------------------------------------- commands

struct SynthArgs {
  std::string profile = "academic";
  std::size_t days = 180;
  std::string start = "2014-02-15";
  CLI::Option *profile_opt, *days_opt, *start_opt;
};

int cmd_synth(const Common& c, const SynthArgs& a) {
  Run run("synth", c.out);
  const auto profile_name = c.pick<std::string>(a.profile_opt, a.profile, "profile", "academic");
  const auto days = c.pick<std::size_t>(a.days_opt, a.days, "days", 180);
  const auto start_text = c.pick<std::string>(a.start_opt, a.start, "start", "2014-02-15");
  const auto profile = profile_preset(profile_name);
  if (!profile) throw UsageError("unknown profile '" + profile_name + "'");
  const auto start = parse_timestamp(start_text.size() == 10 ? start_text + "T00:00:00" : start_text, c.utc_offset);
  if (!start) throw UsageError("bad --start '" + start_text + "'");
  const auto b = synth_building(*profile, days, c.seed, *start + c.utc_offset, c.utc_offset);
  for (const auto& [ch, series] : b.channels) run.write(std::string(channel_name(ch)) + ".csv", serialize_series(series));
  run.finish({{"profile", profile_name}, {"days", days}, {"start", start_text}, {"utc_offset", c.utc_offset}}, c.seed);
  return 0;
}

struct FuseArgs {
  std::string input_dir;
  std::map<std::string, std::string> paths;
  std::int64_t grid = kDefaultGridSeconds;
  CLI::Option *dir_opt, *grid_opt;
};

int cmd_fuse(const Common& c, const FuseArgs& a) {
  Run run("fuse", c.out);
  const auto dir = c.pick<std::string>(a.dir_opt, a.input_dir, "input_dir", "");
  const auto grid = c.pick<std::int64_t>(a.grid_opt, a.grid, "grid", kDefaultGridSeconds);
  std::map<Channel, ValidatedSeries> channels;
  json used = json::object();
  for (Channel ch : kAllChannels) {
    const std::string name(channel_name(ch));
    std::string path = a.paths.count(name) ? a.paths.at(name) : "";
    if (path.empty() && c.file.contains("channels") && c.file.at("channels").contains(name)) {
      path = c.file.at("channels").at(name).get<std::string>();
    }
    if (path.empty() && !dir.empty()) path = (fs::path(dir) / (name + ".csv")).string();
    if (path.empty()) throw UsageError("no input for channel " + name + " (use --" + name + " or --input-dir)");
    used[name] = path;
    channels.emplace(ch, validate_series(parse_series(run.input(path), ch, c.utc_offset)));
  }
  const auto fused = fuse(channels, grid, c.utc_offset);
  run.write("fused.csv", serialize_fused(fused));
  run.write("feature_scores.csv", scores_csv(feature_scores(fused)));
  run.write("correlations.csv", correlations_csv(correlations(fused)));
  run.finish({{"channels", used}, {"grid", grid}, {"utc_offset", c.utc_offset}}, c.seed);
  std::cout << fused.size() << " rows from " << format_timestamp(fused.rows.front().time) << " to "
            << format_timestamp(fused.rows.back().time) << "\n";
  return 0;
}

struct DataArgs {
  std::string data;
  CLI::Option* data_opt = nullptr;
  void add(CLI::App* app) { data_opt = app->add_option("--data", data, "fused dataset CSV"); }
};

int cmd_train(const Common& c, const DataArgs& d, const ModelFlags& m) {
  Run run("train", c.out);
  const ModelSpec spec = m.resolve(c);
  const auto data = load_fused(run, c, d.data_opt, d.data);
  const auto split = chronological_split(data, spec.split);
  const auto trained = train_model(data, spec, split.train);
  auto history = trained.loss_history;
  if (history.empty()) {
    const auto p = predict_rows(trained.artifact, data, split.train);
    history.push_back(mae(p.actual, p.predicted));
  }
  run.write("model.decm", save_model(trained.artifact));
  run.write("training_log.csv", log_csv(history));
  json summary = {{"train_rows", split.train.size()}, {"final_train_mae", history.back()}};
  if (split.val.size() > 0) {
    const auto p = predict_rows(trained.artifact, data, split.val);
    if (!p.rows.empty()) {
      summary["val_mae"] = mae(p.actual, p.predicted);
      std::cout << "validation MAE (normalized): " << detail::format_double(mae(p.actual, p.predicted)) << "\n";
    }
  }
  run.finish({{"spec", spec_to_json(spec)}, {"summary", summary}}, c.seed);
  return 0;
}

struct TuneArgs {
  std::size_t budget = 10;
  std::size_t radius = 2;
  bool timings = false;
  CLI::Option *budget_opt, *radius_opt;
};

int cmd_tune(const Common& c, const DataArgs& d, const ModelFlags& m, const TuneArgs& a) {
  Run run("tune", c.out);
  const ModelSpec spec = m.resolve(c);
  const auto data = load_fused(run, c, d.data_opt, d.data);
  const auto budget = c.pick<std::size_t>(a.budget_opt, a.budget, "budget", 10);
  RadiusSpec radius;
  radius.steps = c.pick<std::size_t>(a.radius_opt, a.radius, "radius", 2);
  radius.int_steps = {{"n_estimators", 50}, {"units", 4}};
  const auto result = tune(default_space(spec.kind), budget, c.seed, radius, make_objective(data, spec),
                           complexity_for(spec), spec.seed);
  run.write("random_trials.csv", trials_csv(result.random, spec.kind, a.timings));
  run.write("grid_trials.csv", trials_csv(result.refined.table, spec.kind, a.timings));
  const ModelSpec best = apply_params(spec, result.refined.best.config);
  run.write("best_config.json", spec_to_json(best).dump(2) + "\n");
  run.finish({{"spec", spec_to_json(spec)}, {"budget", budget}, {"radius", radius.steps}}, c.seed);
  std::cout << "best " << config_json(result.refined.best.config) << " val MAE "
            << detail::format_double(result.refined.best.val_mae) << "\n";
  return 0;
}

struct EvalArgs {
  std::string model_file;
  std::size_t overlay_rows = 300;
  std::vector<std::string> buildings;
  std::vector<std::string> compare;
  std::vector<std::string> spans;
  CLI::Option *model_file_opt, *overlay_opt;
};

int cmd_evaluate(const Common& c, const DataArgs& d, const ModelFlags& m, const EvalArgs& a) {
  Run run("evaluate", c.out);
  json cfg = json::object();
  const auto model_path = c.pick<std::string>(a.model_file_opt, a.model_file, "model_file", "");
  if (model_path.empty() && a.buildings.empty()) throw UsageError("evaluate needs --model-file or --building");

  ModelSpec spec = m.resolve(c);
  if (!model_path.empty()) {
    const auto artifact = load_model(run.input(model_path));
    spec = artifact.spec;
    const auto data = load_fused(run, c, d.data_opt, d.data);
    const auto split = chronological_split(data, artifact.spec.split);
    const auto p = predict_rows(artifact, data, split.test);
    EvalReport test;
    test.entries.push_back(score_predictions(p, artifact.norm, "test", split.test));
    run.write("test_report.csv", report_csv(test));

    std::vector<LabeledDays> fitting;
    for (const auto& s : a.spans.empty() ? default_horizon_spans() : parse_days(a.spans)) {
      if (days_to_rows(s.days, data.grid_interval) <= split.test.size()) {
        fitting.push_back(s);
      } else {
        std::cerr << "warning: horizon '" << s.label << "' exceeds the " << split.test.size() << "-row test split; skipped\n";
      }
    }
    EvalReport horizon;
    if (!fitting.empty()) horizon = horizon_report(artifact, data, split.test, fitting);
    run.write("horizon_report.csv", report_csv(horizon));

    const auto k = c.pick<std::size_t>(a.overlay_opt, a.overlay_rows, "overlay_rows", 300);
    run.write("overlay.csv", overlay_csv(forecast_overlay(artifact, data, split.test, k)));
    cfg["model_file"] = model_path;
    cfg["overlay_rows"] = k;
    std::cout << "test R2 " << detail::format_double(test.entries[0].r2) << ", MAE (normalized) "
              << detail::format_double(test.entries[0].mae_norm) << "\n";
  }

  if (!a.buildings.empty()) {
    std::vector<NamedDataset> sets;
    for (const auto& b : a.buildings) {
      const auto eq = b.find('=');
      if (eq == std::string::npos) throw UsageError("--building expects NAME=PATH, got '" + b + "'");
      sets.push_back({b.substr(0, eq), parse_fused(run.input(b.substr(eq + 1)), c.utc_offset)});
    }
    const auto report = building_report(sets, spec);
    run.write("building_report.csv", report_csv(report));
    std::vector<MaeBar> bars;
    std::vector<ModelKind> kinds;
    for (const auto& name : a.compare) {
      const auto k = parse_model_kind(name);
      if (!k) throw UsageError("unknown model '" + name + "'");
      kinds.push_back(*k);
    }
    if (kinds.empty()) kinds.push_back(spec.kind);
    for (const auto kind : kinds) {
      ModelSpec ks = spec;
      if (kind != spec.kind) {
        ks = default_spec(kind);
        ks.seed = ks.lstm.seed = spec.seed;
        ks.split = spec.split;
      }
      const auto r = kind == spec.kind ? report : building_report(sets, ks);
      for (const auto& e : r.entries) bars.push_back({e.label, std::string(model_name(kind)), e.mae_norm});
    }
    run.write("mae_bars.csv", mae_bars_csv(bars));
    cfg["buildings"] = a.buildings;
  }
  cfg["spec"] = spec_to_json(spec);
  run.finish(cfg, c.seed);
  return 0;
}

struct AblateArgs {
  std::vector<std::string> lengths;
};

int cmd_ablate(const Common& c, const DataArgs& d, const ModelFlags& m, const AblateArgs& a) {
  Run run("ablate", c.out);
  const ModelSpec spec = m.resolve(c);
  const auto data = load_fused(run, c, d.data_opt, d.data);
  const auto split = chronological_split(data, spec.split);
  std::vector<LabeledDays> fitting;
  for (const auto& l : a.lengths.empty() ? default_training_lengths() : parse_days(a.lengths)) {
    if (days_to_rows(l.days, data.grid_interval) <= split.train.end) {
      fitting.push_back(l);
    } else {
      std::cerr << "warning: training length '" << l.label << "' exceeds the " << split.train.end
                << " rows before validation; skipped\n";
    }
  }
  if (fitting.empty()) fail(ErrorCode::LengthExceedsData, "no training length fits the data");
  run.write("ablation_report.csv", report_csv(ablation_report(data, fitting, spec)));
  run.finish({{"spec", spec_to_json(spec)}, {"lengths", json(a.lengths)}}, c.seed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Building energy forecasting pipeline"};
  app.require_subcommand(1);

  Common common;
  // One set per subcommand so each option pointer reports its own count.
  ModelFlags train_model_flags, tune_model_flags, eval_model_flags, ablate_model_flags;
  DataArgs train_data, tune_data, eval_data, ablate_data;

  auto* synth = app.add_subcommand("synth", "generate synthetic per-channel sensor CSVs");
  SynthArgs synth_args;
  synth_args.profile_opt = synth->add_option("--profile", synth_args.profile, "building preset");
  synth_args.days_opt = synth->add_option("--days", synth_args.days, "number of whole days");
  synth_args.start_opt = synth->add_option("--start", synth_args.start, "first local day (YYYY-MM-DD)");

  auto* fuse_cmd = app.add_subcommand("fuse", "align channel CSVs onto one grid");
  FuseArgs fuse_args;
  fuse_args.dir_opt = fuse_cmd->add_option("--input-dir", fuse_args.input_dir, "directory holding <channel>.csv files");
  fuse_args.grid_opt = fuse_cmd->add_option("--grid", fuse_args.grid, "grid interval in seconds");
  for (Channel ch : kAllChannels) {
    const std::string name(channel_name(ch));
    fuse_cmd->add_option("--" + name, fuse_args.paths[name], name + " CSV");
  }

  auto* train = app.add_subcommand("train", "train one model on the training split");
  auto* tune_cmd = app.add_subcommand("tune", "randomized then grid hyperparameter search");
  TuneArgs tune_args;
  tune_args.budget_opt = tune_cmd->add_option("--budget", tune_args.budget, "randomized trials");
  tune_args.radius_opt = tune_cmd->add_option("--radius", tune_args.radius, "grid neighbors per side");
  tune_cmd->add_flag("--timings", tune_args.timings, "record wall-clock seconds per trial (not reproducible)");

  auto* evaluate = app.add_subcommand("evaluate", "test, horizon, overlay and per-building reports");
  EvalArgs eval_args;
  eval_args.model_file_opt = evaluate->add_option("--model-file", eval_args.model_file, "model written by train");
  eval_args.overlay_opt = evaluate->add_option("--overlay-rows", eval_args.overlay_rows, "rows in the overlay CSV");
  evaluate->add_option("--building", eval_args.buildings, "NAME=fused.csv (repeatable)");
  evaluate->add_option("--compare-models", eval_args.compare, "model kinds for the MAE bars")->delimiter(',');
  evaluate->add_option("--spans", eval_args.spans, "horizon spans as DAYS or LABEL=DAYS")->delimiter(',');

  auto* ablate = app.add_subcommand("ablate", "training-length ablation");
  AblateArgs ablate_args;
  ablate->add_option("--lengths", ablate_args.lengths, "training lengths as DAYS or LABEL=DAYS")->delimiter(',');

  for (auto* sub : {synth, fuse_cmd, train, tune_cmd, evaluate, ablate}) add_common(sub, common);
  const std::tuple<CLI::App*, DataArgs*, ModelFlags*> model_subs[] = {{train, &train_data, &train_model_flags},
                                                                     {tune_cmd, &tune_data, &tune_model_flags},
                                                                     {evaluate, &eval_data, &eval_model_flags},
                                                                     {ablate, &ablate_data, &ablate_model_flags}};
  for (const auto& [sub, data, flags] : model_subs) {
    data->add(sub);
    flags->add(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    CLI::App* active = app.get_subcommands().front();
    common.seed_opt = active->get_option("--seed");
    common.offset_opt = active->get_option("--utc-offset");
    common.load();
    if (synth->parsed()) return cmd_synth(common, synth_args);
    if (fuse_cmd->parsed()) return cmd_fuse(common, fuse_args);
    if (train->parsed()) return cmd_train(common, train_data, train_model_flags);
    if (tune_cmd->parsed()) return cmd_tune(common, tune_data, tune_model_flags, tune_args);
    if (evaluate->parsed()) return cmd_evaluate(common, eval_data, eval_model_flags, eval_args);
    if (ablate->parsed()) return cmd_ablate(common, ablate_data, ablate_model_flags, ablate_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::DivergedTraining) return kExitDiverged;
    if (e.code() == ErrorCode::InvalidConfig) return kExitUsage;
    return kExitData;
  } catch (const json::exception& e) {
    std::cerr << "error: config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
