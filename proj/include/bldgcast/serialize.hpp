#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bldgcast/error.hpp"
#include "bldgcast/pipeline.hpp"

namespace bldgcast {

// Model file layout (all integers little-endian, doubles as IEEE-754 bits):
//   "DECM" | u32 version | u8 kind | block config | block params | block norm
// where each block is u64 byte length followed by the payload. The config
// payload is the ModelSpec as compact JSON; see docs/model_format.md.
inline constexpr char kModelMagic[4] = {'D', 'E', 'C', 'M'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

namespace detail {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) { bytes_.append(s); }
  void block(const std::string& payload) {
    u64(payload.size());
    raw(payload);
  }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view raw(std::size_t n) {
    need(n);
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  std::string_view block() { return raw(static_cast<std::size_t>(u64())); }
  /// Element count whose payload of `elem_bytes` each must still fit.
  std::size_t count(std::size_t elem_bytes) {
    const std::uint64_t n = u64();
    if (elem_bytes > 0 && n > (bytes_.size() - pos_) / elem_bytes) fail(ErrorCode::FormatError, "count exceeds payload");
    return static_cast<std::size_t>(n);
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::FormatError, "truncated model data");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

inline void write_tree(ByteWriter& w, const DecisionTree& t) {
  w.u64(t.n_features);
  w.u64(t.config.max_depth);
  w.u64(t.config.min_samples_split);
  w.u64(t.config.max_features);
  w.u64(t.nodes.size());
  for (const auto& n : t.nodes) {
    w.i32(n.feature);
    w.f64(n.threshold);
    w.f64(n.value);
    w.f64(n.sse);
    w.u32(n.left);
    w.u32(n.right);
    w.u32(n.samples);
    w.u32(n.depth);
  }
}

inline DecisionTree read_tree(ByteReader& r) {
  DecisionTree t;
  t.n_features = r.u64();
  t.config.max_depth = r.u64();
  t.config.min_samples_split = r.u64();
  t.config.max_features = r.u64();
  t.nodes.resize(r.count(44));
  for (auto& n : t.nodes) {
    n.feature = r.i32();
    n.threshold = r.f64();
    n.value = r.f64();
    n.sse = r.f64();
    n.left = r.u32();
    n.right = r.u32();
    n.samples = r.u32();
    n.depth = r.u32();
  }
  for (const auto& n : t.nodes) {
    if (!n.is_leaf() && (n.left >= t.nodes.size() || n.right >= t.nodes.size() ||
                         static_cast<std::size_t>(n.feature) >= t.n_features)) {
      fail(ErrorCode::FormatError, "tree node references out of range");
    }
  }
  if (t.nodes.empty()) fail(ErrorCode::FormatError, "tree without nodes");
  return t;
}

inline std::string param_block(const TrainedModel& model) {
  ByteWriter w;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, RidgeModel>) {
          w.u8(m.fit_intercept ? 1 : 0);
          w.f64(m.alpha);
          w.f64(m.intercept);
          w.u64(m.weights.size());
          for (double v : m.weights) w.f64(v);
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          write_tree(w, m);
        } else if constexpr (std::is_same_v<T, RandomForest>) {
          w.u64(m.config.n_estimators);
          w.u8(m.config.bootstrap ? 1 : 0);
          w.u64(m.config.max_features);
          w.u64(m.config.tree.max_depth);
          w.u64(m.config.tree.min_samples_split);
          w.u64(m.config.tree.max_features);
          w.u64(m.seed);
          w.u64(m.trees.size());
          for (std::size_t i = 0; i < m.trees.size(); ++i) {
            w.u64(m.tree_seeds[i]);
            write_tree(w, m.trees[i]);
          }
        } else {
          w.u64(m.shape().input);
          w.u64(m.shape().hidden);
          w.u64(m.shape().dense);
          w.u64(m.params().size());
          for (double v : m.params()) w.f64(v);
        }
      },
      model);
  return w.take();
}

inline TrainedModel read_params(ModelKind kind, std::string_view payload) {
  ByteReader r(payload);
  TrainedModel out;
  switch (kind) {
    case ModelKind::Ridge: {
      RidgeModel m;
      m.fit_intercept = r.u8() != 0;
      m.alpha = r.f64();
      m.intercept = r.f64();
      m.weights.resize(r.count(8));
      for (double& v : m.weights) v = r.f64();
      out = std::move(m);
      break;
    }
    case ModelKind::Tree: out = read_tree(r); break;
    case ModelKind::Forest: {
      RandomForest f;
      f.config.n_estimators = r.u64();
      f.config.bootstrap = r.u8() != 0;
      f.config.max_features = r.u64();
      f.config.tree.max_depth = r.u64();
      f.config.tree.min_samples_split = r.u64();
      f.config.tree.max_features = r.u64();
      f.seed = r.u64();
      const std::size_t n = r.count(8);
      for (std::size_t i = 0; i < n; ++i) {
        f.tree_seeds.push_back(r.u64());
        f.trees.push_back(read_tree(r));
      }
      out = std::move(f);
      break;
    }
    case ModelKind::Lstm: {
      LstmShape shape;
      shape.input = r.u64();
      shape.hidden = r.u64();
      shape.dense = r.u64();
      std::vector<double> params(r.count(8));
      for (double& v : params) v = r.f64();
      if (params.size() != LstmLayout(shape).total) fail(ErrorCode::FormatError, "LSTM parameter count mismatch");
      out = LstmModel(shape, std::move(params));
      break;
    }
  }
  if (!r.done()) fail(ErrorCode::FormatError, "trailing bytes in parameter block");
  return out;
}

}  // namespace detail

inline std::string save_model(const ModelArtifact& a) {
  detail::ByteWriter w;
  w.raw(std::string_view(kModelMagic, 4));
  w.u32(kModelFormatVersion);
  w.u8(static_cast<std::uint8_t>(a.kind()));
  w.block(spec_to_json(a.spec).dump());
  w.block(detail::param_block(a.model));
  detail::ByteWriter norm;
  for (const auto& c : a.norm.columns) {
    norm.f64(c.min);
    norm.f64(c.max);
  }
  norm.f64(a.norm.target.min);
  norm.f64(a.norm.target.max);
  w.block(norm.take());
  return w.take();
}

inline ModelArtifact load_model(std::string_view bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) fail(ErrorCode::FormatError, "bad magic");
  r.raw(4);
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) fail(ErrorCode::UnsupportedVersion, "model format version " + std::to_string(version));
  const std::uint8_t kind_tag = r.u8();
  if (kind_tag > static_cast<std::uint8_t>(ModelKind::Lstm)) fail(ErrorCode::FormatError, "unknown model kind tag");
  const auto kind = static_cast<ModelKind>(kind_tag);

  ModelArtifact a;
  const auto config = r.block();
  nlohmann::json j = nlohmann::json::parse(config, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::FormatError, "config block is not valid JSON");
  try {
    a.spec = spec_from_json(j);
  } catch (const Error& e) {
    fail(ErrorCode::FormatError, e.what());
  }
  if (a.spec.kind != kind) fail(ErrorCode::FormatError, "config kind differs from header kind");
  a.model = detail::read_params(kind, r.block());

  detail::ByteReader nr(r.block());
  for (auto& c : a.norm.columns) {
    c.min = nr.f64();
    c.max = nr.f64();
  }
  a.norm.target.min = nr.f64();
  a.norm.target.max = nr.f64();
  if (!nr.done() || !r.done()) fail(ErrorCode::FormatError, "trailing bytes");
  return a;
}

}  // namespace bldgcast
