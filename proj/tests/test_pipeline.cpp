#include <cstring>

#include "test_util.hpp"

using namespace bldgcast;

namespace {

const AlignedDataset& small_building() {
  static const AlignedDataset d = testutil::synthetic("academic", 24, 3);
  return d;
}

ModelSpec quick_spec(ModelKind kind) {
  ModelSpec s = default_spec(kind);
  s.forest.n_estimators = 4;
  s.lstm.shape = {5, 6, 3};
  s.lstm.epochs = 2;
  s.lstm.batch = 64;
  return s;
}

}  // namespace

TEST(Spec, DefaultsMatchTunedOptima) {
  const ModelSpec s;
  EXPECT_EQ(s.kind, ModelKind::Lstm);
  EXPECT_EQ(s.seed, 42u);
  EXPECT_EQ(s.alpha, 1.0);
  EXPECT_EQ(s.tree.max_depth, 14u);
  EXPECT_EQ(s.tree.min_samples_split, 20u);
  EXPECT_EQ(s.forest.n_estimators, 500u);
  EXPECT_EQ(s.lstm.shape.hidden, 32u);
  EXPECT_EQ(s.lstm.shape.dense, 5u);
  EXPECT_EQ(s.lstm.batch, 64u);
  EXPECT_EQ(s.lstm.epochs, 20u);
  EXPECT_EQ(s.lags, 3u);
  EXPECT_EQ(s.window, 6u);
}

TEST(Spec, JsonRoundTrip) {
  for (auto kind : {ModelKind::Ridge, ModelKind::Tree, ModelKind::Forest, ModelKind::Lstm}) {
    ModelSpec s = default_spec(kind);
    s.seed = 0xFFFFFFFFFFFFFFF1ull;
    s.lstm.seed = s.seed;
    s.alpha = 0.125;
    s.tree.max_depth = kUnlimitedDepth;
    s.forest.tree.min_samples_split = 7;
    s.forest.max_features = 2;
    s.lstm.learning_rate = 3e-4;
    s.window = 12;
    s.split = {0.6, 0.2, 0.2};
    EXPECT_EQ(spec_from_json(spec_to_json(s)), s) << model_name(kind);
  }
}

TEST(Spec, FlatKeysAndErrors) {
  const auto s = spec_from_json(nlohmann::json::parse(R"({"model":"tree","max_depth":5,"seed":7,"note":"x","other":3})"));
  EXPECT_EQ(s.kind, ModelKind::Tree);
  EXPECT_EQ(s.tree.max_depth, 5u);
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.lstm.seed, 7u);
  EXPECT_ERROR_CODE(spec_from_json(nlohmann::json::parse(R"({"model":"gru"})")), ErrorCode::InvalidConfig);
  EXPECT_ERROR_CODE(spec_from_json(nlohmann::json::parse(R"({"split":[0.5,0.5,0.5]})")), ErrorCode::InvalidConfig);
  EXPECT_ERROR_CODE(spec_from_json(nlohmann::json::parse(R"({"lstm":{"unts":3}})")), ErrorCode::InvalidConfig);
  EXPECT_ERROR_CODE(spec_from_json(nlohmann::json::parse(R"({"lstm":{"units":"many"}})")), ErrorCode::InvalidConfig);
  ModelSpec t;
  EXPECT_ERROR_CODE(set_param(t, "units", 2.5), ErrorCode::InvalidConfig);
  EXPECT_ERROR_CODE(set_param(t, "alpha", -1), ErrorCode::InvalidConfig);
}

TEST(Spec, ForestTreeKeysRouteToMemberTrees) {
  ModelSpec s = default_spec(ModelKind::Forest);
  set_param(s, "max_depth", 6);
  EXPECT_EQ(s.forest.tree.max_depth, 6u);
  EXPECT_EQ(s.tree.max_depth, 14u);
  EXPECT_EQ(parse_model_kind("linear"), ModelKind::Ridge);
}

TEST(TrainModel, ScalerFittedOnTrainingRowsOnly) {
  const auto& d = small_building();
  const auto split = chronological_split(d);
  const auto out = train_model(d, quick_spec(ModelKind::Ridge), split.train);
  const auto expect = fit_scaler(slice_rows(d, split.train.begin, split.train.end));
  for (std::size_t c = 0; c < kNumColumns; ++c) {
    EXPECT_EQ(out.artifact.norm.columns[c].min, expect.columns[c].min);
    EXPECT_EQ(out.artifact.norm.columns[c].max, expect.columns[c].max);
  }
  EXPECT_EQ(out.artifact.norm.target.min, expect.columns[0].min);
}

TEST(TrainModel, AllKindsPredictOnTestRows) {
  const auto& d = small_building();
  const auto split = chronological_split(d);
  for (auto kind : {ModelKind::Ridge, ModelKind::Tree, ModelKind::Forest, ModelKind::Lstm}) {
    const auto out = train_model(d, quick_spec(kind), split.train);
    const auto p = predict_rows(out.artifact, d, split.test);
    ASSERT_FALSE(p.rows.empty()) << model_name(kind);
    EXPECT_EQ(p.rows.size(), p.actual.size());
    EXPECT_EQ(p.rows.size(), p.predicted.size());
    for (auto r : p.rows) EXPECT_TRUE(split.test.contains(r));
    for (double v : p.predicted) EXPECT_TRUE(std::isfinite(v));
    EXPECT_EQ(out.loss_history.size(), kind == ModelKind::Lstm ? 2u : 0u);
  }
}

TEST(TrainModel, LstmUsesOnlyTrainingTargets) {
  const auto& d = small_building();
  const auto split = chronological_split(d);
  const auto spec = quick_spec(ModelKind::Lstm);
  const auto out = train_model(d, spec, split.train);
  // retraining on data whose rows after the training split are scrambled
  // must not change the model
  AlignedDataset altered = d;
  for (std::size_t i = split.train.end; i < altered.size(); ++i) altered.rows[i].energy *= 3.0;
  EXPECT_EQ(train_model(altered, spec, split.train).artifact, out.artifact);
}

TEST(TrainModel, Deterministic) {
  const auto& d = small_building();
  const auto split = chronological_split(d);
  for (auto kind : {ModelKind::Forest, ModelKind::Lstm}) {
    const auto a = train_model(d, quick_spec(kind), split.train);
    const auto b = train_model(d, quick_spec(kind), split.train);
    EXPECT_EQ(a.artifact, b.artifact);
  }
}

TEST(Serialize, RoundTripAllKinds) {
  const auto& d = small_building();
  const auto split = chronological_split(d);
  for (auto kind : {ModelKind::Ridge, ModelKind::Tree, ModelKind::Forest, ModelKind::Lstm}) {
    const auto a = train_model(d, quick_spec(kind), split.train).artifact;
    const std::string bytes = save_model(a);
    EXPECT_EQ(bytes.substr(0, 4), "DECM");
    const auto b = load_model(bytes);
    EXPECT_EQ(b, a) << model_name(kind);
    EXPECT_EQ(save_model(b), bytes);
    const auto pa = predict_rows(a, d, split.test);
    const auto pb = predict_rows(b, d, split.test);
    EXPECT_EQ(pa.predicted, pb.predicted);
  }
}

TEST(Serialize, CorruptInputs) {
  const auto& d = small_building();
  const auto a = train_model(d, quick_spec(ModelKind::Tree), chronological_split(d).train).artifact;
  std::string bytes = save_model(a);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_ERROR_CODE(load_model(bad_magic), ErrorCode::FormatError);

  std::string bad_version = bytes;
  bad_version[4] = 2;
  EXPECT_ERROR_CODE(load_model(bad_version), ErrorCode::UnsupportedVersion);

  EXPECT_ERROR_CODE(load_model(bytes.substr(0, bytes.size() - 3)), ErrorCode::FormatError);
  EXPECT_ERROR_CODE(load_model(bytes + "x"), ErrorCode::FormatError);
  EXPECT_ERROR_CODE(load_model(""), ErrorCode::FormatError);

  std::string bad_kind = bytes;
  bad_kind[8] = static_cast<char>(ModelKind::Ridge);
  EXPECT_ERROR_CODE(load_model(bad_kind), ErrorCode::FormatError);
  bad_kind[8] = 9;
  EXPECT_ERROR_CODE(load_model(bad_kind), ErrorCode::FormatError);
}

TEST(Serialize, HeaderLayout) {
  ModelArtifact a;
  a.spec = default_spec(ModelKind::Ridge);
  a.model = RidgeModel{{1.0, 2.0}, 0.5, 1.0, true};
  const std::string bytes = save_model(a);
  std::uint32_t version = 0;
  std::memcpy(&version, bytes.data() + 4, 4);
  EXPECT_EQ(version, kModelFormatVersion);
  EXPECT_EQ(bytes[8], 0);
  std::uint64_t config_len = 0;
  std::memcpy(&config_len, bytes.data() + 9, 8);
  const auto config = nlohmann::json::parse(bytes.substr(17, config_len));
  EXPECT_EQ(config.at("model"), "ridge");
  // params: u8 + alpha + intercept + u64 count + two weights
  std::uint64_t param_len = 0;
  std::memcpy(&param_len, bytes.data() + 17 + config_len, 8);
  EXPECT_EQ(param_len, 1u + 8 + 8 + 8 + 16);
  EXPECT_EQ(bytes.size(), 17 + config_len + 8 + param_len + 8 + 12 * 8);
}
