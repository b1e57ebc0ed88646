#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bldgcast/error.hpp"
#include "bldgcast/features.hpp"
#include "bldgcast/models/rmsprop.hpp"
#include "bldgcast/rng.hpp"

namespace bldgcast {

/// Single LSTM layer followed by two tanh dense layers of equal width and a
/// linear scalar head.
struct LstmShape {
  std::size_t input = kNumColumns;
  std::size_t hidden = 32;
  std::size_t dense = 5;

  bool operator==(const LstmShape&) const = default;
};

/// Offsets of each parameter block inside the flat parameter vector. Gate rows
/// are stacked in the order input, forget, candidate, output.
struct LstmLayout {
  std::size_t w_x, w_h, b, d1_w, d1_b, d2_w, d2_b, out_w, out_b, total;

  explicit LstmLayout(const LstmShape& s) {
    const std::size_t g = 4 * s.hidden;
    w_x = 0;
    w_h = w_x + g * s.input;
    b = w_h + g * s.hidden;
    d1_w = b + g;
    d1_b = d1_w + s.dense * s.hidden;
    d2_w = d1_b + s.dense;
    d2_b = d2_w + s.dense * s.dense;
    out_w = d2_b + s.dense;
    out_b = out_w + s.dense;
    total = out_b + 1;
  }
};

class LstmModel {
 public:
  LstmModel() : LstmModel(LstmShape{}) {}
  explicit LstmModel(const LstmShape& shape) : shape_(shape), params_(LstmLayout(shape).total, 0.0) {}
  LstmModel(const LstmShape& shape, std::vector<double> params) : shape_(shape), params_(std::move(params)) {
    if (params_.size() != LstmLayout(shape_).total) fail(ErrorCode::ShapeMismatch, "parameter count does not match shape");
  }

  const LstmShape& shape() const noexcept { return shape_; }
  LstmLayout layout() const { return LstmLayout(shape_); }
  std::span<const double> params() const noexcept { return params_; }

  /// Writable view; invalidates activation caches taken before the call.
  std::span<double> mutable_params() noexcept {
    ++revision_;
    return params_;
  }
  std::uint64_t revision() const noexcept { return revision_; }

  bool operator==(const LstmModel& o) const { return shape_ == o.shape_ && params_ == o.params_; }

 private:
  LstmShape shape_;
  std::vector<double> params_;
  std::uint64_t revision_ = 0;
};

/// Uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights, zero biases except the
/// forget gate, which starts at 1.
inline LstmModel init_lstm(const LstmShape& shape, std::uint64_t seed) {
  LstmModel m(shape);
  const LstmLayout L(shape);
  std::mt19937_64 rng(seed);
  auto p = m.mutable_params();
  auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
    const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t i = 0; i < count; ++i) p[begin + i] = u(rng);
  };
  const std::size_t g = 4 * shape.hidden;
  fill(L.w_x, g * shape.input, shape.input + shape.hidden);
  fill(L.w_h, g * shape.hidden, shape.input + shape.hidden);
  for (std::size_t j = 0; j < shape.hidden; ++j) p[L.b + shape.hidden + j] = 1.0;
  fill(L.d1_w, shape.dense * shape.hidden, shape.hidden);
  fill(L.d2_w, shape.dense * shape.dense, shape.dense);
  fill(L.out_w, shape.dense, shape.dense);
  return m;
}

/// Everything the backward pass needs from a forward pass.
struct LstmCache {
  std::uint64_t revision = 0;
  const LstmModel* model = nullptr;
  std::size_t batch = 0;
  std::size_t window = 0;
  std::vector<double> inputs;  // batch x window x input
  std::vector<double> gates;   // batch x window x 4H, activated (i, f, g, o)
  std::vector<double> cells;   // batch x (window + 1) x H, slot 0 is the zero state
  std::vector<double> hiddens; // batch x (window + 1) x H
  std::vector<double> dense1;  // batch x dense
  std::vector<double> dense2;  // batch x dense
};

namespace detail {

inline double sigmoid(double z) noexcept { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

/// Forward pass over `batch` sequences laid out as batch x window x input.
inline std::vector<double> lstm_forward(const LstmModel& m, std::span<const double> sequences, std::size_t window,
                                        LstmCache* cache = nullptr) {
  const LstmShape& s = m.shape();
  const LstmLayout L(s);
  const std::size_t H = s.hidden, D = s.input, K = s.dense, G = 4 * H;
  if (window == 0 || sequences.size() % (window * D) != 0) {
    fail(ErrorCode::ShapeMismatch, "sequence block is not a multiple of window x " + std::to_string(D));
  }
  for (double v : sequences) {
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteInput, "sequence contains a non-finite value");
  }
  const std::size_t B = sequences.size() / (window * D);
  const double* p = m.params().data();

  if (cache) {
    cache->revision = m.revision();
    cache->model = &m;
    cache->batch = B;
    cache->window = window;
    cache->inputs.assign(sequences.begin(), sequences.end());
    cache->gates.assign(B * window * G, 0.0);
    cache->cells.assign(B * (window + 1) * H, 0.0);
    cache->hiddens.assign(B * (window + 1) * H, 0.0);
    cache->dense1.assign(B * K, 0.0);
    cache->dense2.assign(B * K, 0.0);
  }

  std::vector<double> out(B);
  std::vector<double> z(G), c_prev(H), h_prev(H), c(H), h(H), a1(K), a2(K);
  for (std::size_t bi = 0; bi < B; ++bi) {
    std::fill(c_prev.begin(), c_prev.end(), 0.0);
    std::fill(h_prev.begin(), h_prev.end(), 0.0);
    for (std::size_t t = 0; t < window; ++t) {
      const double* x = sequences.data() + (bi * window + t) * D;
      for (std::size_t r = 0; r < G; ++r) {
        double acc = p[L.b + r];
        const double* wx = p + L.w_x + r * D;
        for (std::size_t k = 0; k < D; ++k) acc += wx[k] * x[k];
        const double* wh = p + L.w_h + r * H;
        for (std::size_t k = 0; k < H; ++k) acc += wh[k] * h_prev[k];
        z[r] = acc;
      }
      for (std::size_t j = 0; j < H; ++j) {
        const double ig = detail::sigmoid(z[j]);
        const double fg = detail::sigmoid(z[H + j]);
        const double gg = std::tanh(z[2 * H + j]);
        const double og = detail::sigmoid(z[3 * H + j]);
        c[j] = fg * c_prev[j] + ig * gg;
        h[j] = og * std::tanh(c[j]);
        z[j] = ig;
        z[H + j] = fg;
        z[2 * H + j] = gg;
        z[3 * H + j] = og;
      }
      if (cache) {
        std::copy(z.begin(), z.end(), cache->gates.begin() + static_cast<std::ptrdiff_t>((bi * window + t) * G));
        std::copy(c.begin(), c.end(), cache->cells.begin() + static_cast<std::ptrdiff_t>((bi * (window + 1) + t + 1) * H));
        std::copy(h.begin(), h.end(), cache->hiddens.begin() + static_cast<std::ptrdiff_t>((bi * (window + 1) + t + 1) * H));
      }
      std::swap(c, c_prev);
      std::swap(h, h_prev);
    }
    // h_prev now holds the final hidden state
    for (std::size_t k = 0; k < K; ++k) {
      double acc = p[L.d1_b + k];
      const double* w = p + L.d1_w + k * H;
      for (std::size_t j = 0; j < H; ++j) acc += w[j] * h_prev[j];
      a1[k] = std::tanh(acc);
    }
    for (std::size_t k = 0; k < K; ++k) {
      double acc = p[L.d2_b + k];
      const double* w = p + L.d2_w + k * K;
      for (std::size_t j = 0; j < K; ++j) acc += w[j] * a1[j];
      a2[k] = std::tanh(acc);
    }
    double y = p[L.out_b];
    for (std::size_t k = 0; k < K; ++k) y += p[L.out_w + k] * a2[k];
    out[bi] = y;
    if (cache) {
      std::copy(a1.begin(), a1.end(), cache->dense1.begin() + static_cast<std::ptrdiff_t>(bi * K));
      std::copy(a2.begin(), a2.end(), cache->dense2.begin() + static_cast<std::ptrdiff_t>(bi * K));
    }
  }
  return out;
}

inline std::vector<double> lstm_forward(const LstmModel& m, const SequenceDataset& d, LstmCache* cache = nullptr) {
  if (d.features != m.shape().input) fail(ErrorCode::ShapeMismatch, "feature dimension differs from model input");
  return lstm_forward(m, d.sequences, d.window, cache);
}

/// Backpropagation through time. Returns sum_b loss_grad[b] * d(output_b)/d(params).
inline std::vector<double> lstm_backward(const LstmModel& m, const LstmCache& cache, std::span<const double> loss_grad) {
  if (cache.model != &m || cache.revision != m.revision()) {
    fail(ErrorCode::StaleCache, "cache was produced by a different model state");
  }
  if (loss_grad.size() != cache.batch) fail(ErrorCode::ShapeMismatch, "loss gradient length differs from batch");
  const LstmShape& s = m.shape();
  const LstmLayout L(s);
  const std::size_t H = s.hidden, D = s.input, K = s.dense, G = 4 * H, W = cache.window;
  const double* p = m.params().data();

  std::vector<double> grad(L.total, 0.0);
  double* gp = grad.data();
  std::vector<double> da2(K), dz2(K), da1(K), dz1(K), dh(H), dc(H), dz(G), dh_prev(H);

  for (std::size_t bi = 0; bi < cache.batch; ++bi) {
    const double dy = loss_grad[bi];
    if (dy == 0.0) continue;
    const double* a1 = cache.dense1.data() + bi * K;
    const double* a2 = cache.dense2.data() + bi * K;
    const double* h_last = cache.hiddens.data() + (bi * (W + 1) + W) * H;

    gp[L.out_b] += dy;
    for (std::size_t k = 0; k < K; ++k) {
      gp[L.out_w + k] += dy * a2[k];
      dz2[k] = dy * p[L.out_w + k] * (1.0 - a2[k] * a2[k]);
    }
    std::fill(da1.begin(), da1.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      gp[L.d2_b + k] += dz2[k];
      for (std::size_t j = 0; j < K; ++j) {
        gp[L.d2_w + k * K + j] += dz2[k] * a1[j];
        da1[j] += p[L.d2_w + k * K + j] * dz2[k];
      }
    }
    for (std::size_t k = 0; k < K; ++k) dz1[k] = da1[k] * (1.0 - a1[k] * a1[k]);
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t k = 0; k < K; ++k) {
      gp[L.d1_b + k] += dz1[k];
      for (std::size_t j = 0; j < H; ++j) {
        gp[L.d1_w + k * H + j] += dz1[k] * h_last[j];
        dh[j] += p[L.d1_w + k * H + j] * dz1[k];
      }
    }

    std::fill(dc.begin(), dc.end(), 0.0);
    for (std::size_t t = W; t-- > 0;) {
      const double* gates = cache.gates.data() + (bi * W + t) * G;
      const double* c_t = cache.cells.data() + (bi * (W + 1) + t + 1) * H;
      const double* c_prev = cache.cells.data() + (bi * (W + 1) + t) * H;
      const double* h_prev = cache.hiddens.data() + (bi * (W + 1) + t) * H;
      const double* x = cache.inputs.data() + (bi * W + t) * D;
      for (std::size_t j = 0; j < H; ++j) {
        const double ig = gates[j], fg = gates[H + j], gg = gates[2 * H + j], og = gates[3 * H + j];
        const double tc = std::tanh(c_t[j]);
        const double d_o = dh[j] * tc;
        const double d_c = dc[j] + dh[j] * og * (1.0 - tc * tc);
        dz[j] = d_c * gg * ig * (1.0 - ig);
        dz[H + j] = d_c * c_prev[j] * fg * (1.0 - fg);
        dz[2 * H + j] = d_c * ig * (1.0 - gg * gg);
        dz[3 * H + j] = d_o * og * (1.0 - og);
        dc[j] = d_c * fg;
      }
      std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
      for (std::size_t r = 0; r < G; ++r) {
        const double d = dz[r];
        gp[L.b + r] += d;
        double* gwx = gp + L.w_x + r * D;
        for (std::size_t k = 0; k < D; ++k) gwx[k] += d * x[k];
        double* gwh = gp + L.w_h + r * H;
        const double* wh = p + L.w_h + r * H;
        for (std::size_t k = 0; k < H; ++k) {
          gwh[k] += d * h_prev[k];
          dh_prev[k] += wh[k] * d;
        }
      }
      std::swap(dh, dh_prev);
    }
  }
  return grad;
}

inline void rmsprop_step(LstmModel& m, std::span<const double> grads, RmspropState& state) {
  rmsprop_step(m.mutable_params(), grads, state);
}

struct LstmTrainConfig {
  LstmShape shape{};
  std::size_t batch = 64;
  std::size_t epochs = 20;
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
  std::uint64_t seed = kDefaultSeed;

  bool operator==(const LstmTrainConfig&) const = default;
};

struct LstmTrainResult {
  LstmModel model;
  /// Mean absolute training error per epoch, accumulated over its mini-batches.
  std::vector<double> loss_history;
};

/// Mini-batch RMSProp on the MAE loss. The subgradient of |r| at r = 0 is 0.
inline LstmTrainResult train_lstm(const SequenceDataset& d, const LstmTrainConfig& cfg) {
  if (d.size() == 0) fail(ErrorCode::EmptyDataset, "no training sequences");
  if (cfg.batch == 0 || cfg.epochs == 0 || !(cfg.learning_rate > 0.0) || cfg.rho < 0.0 || cfg.rho >= 1.0 ||
      cfg.shape.hidden == 0 || cfg.shape.dense == 0) {
    fail(ErrorCode::InvalidConfig, "invalid LSTM training configuration");
  }
  if (d.features != cfg.shape.input) fail(ErrorCode::ShapeMismatch, "feature dimension differs from model input");

  LstmTrainResult result{init_lstm(cfg.shape, derive_seed(cfg.seed, 0)), {}};
  LstmModel& m = result.model;
  RmspropState opt(m.params().size(), cfg.learning_rate, cfg.rho, cfg.epsilon);
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, 1));

  const std::size_t n = d.size();
  const std::size_t step = d.window * d.features;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_x;
  std::vector<double> loss_grad;
  LstmCache cache;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double abs_sum = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch) {
      const std::size_t b = std::min(cfg.batch, n - start);
      batch_x.resize(b * step);
      for (std::size_t i = 0; i < b; ++i) {
        const auto seq = d.sequence(order[start + i]);
        std::copy(seq.begin(), seq.end(), batch_x.begin() + static_cast<std::ptrdiff_t>(i * step));
      }
      const auto pred = lstm_forward(m, batch_x, d.window, &cache);
      loss_grad.assign(b, 0.0);
      for (std::size_t i = 0; i < b; ++i) {
        const double r = pred[i] - d.targets[order[start + i]];
        abs_sum += std::abs(r);
        loss_grad[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) / static_cast<double>(b);
      }
      if (!std::isfinite(abs_sum)) {
        fail(ErrorCode::DivergedTraining, "non-finite loss in epoch " + std::to_string(epoch + 1));
      }
      const auto grad = lstm_backward(m, cache, loss_grad);
      rmsprop_step(m, grad, opt);
    }
    result.loss_history.push_back(abs_sum / static_cast<double>(n));
  }
  return result;
}

/// Batched inference without retaining activations.
inline std::vector<double> lstm_predict(const LstmModel& m, const SequenceDataset& d) {
  if (d.features != m.shape().input) fail(ErrorCode::ShapeMismatch, "feature dimension differs from model input");
  std::vector<double> out;
  out.reserve(d.size());
  const std::size_t chunk = 1024;
  const std::size_t step = d.window * d.features;
  for (std::size_t start = 0; start < d.size(); start += chunk) {
    const std::size_t b = std::min(chunk, d.size() - start);
    const auto part = lstm_forward(m, std::span<const double>(d.sequences.data() + start * step, b * step), d.window);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

}  // namespace bldgcast
