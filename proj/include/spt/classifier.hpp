#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spt/features.hpp"
#include "spt/rng.hpp"

namespace spt {

// Two-layer tanh network over hashed term-frequency vectors:
//   z = W2 * tanh(W1 * x + b1) + b2
// Class index 0 is the negative class, index 1 the positive class.
// The struct is a plain value; copying it is a deep, independent copy.
struct ClassifierState {
  std::int32_t dim = 0;
  std::int32_t hidden = 0;
  std::uint64_t init_seed = 0;
  // w1 is stored feature-major: w1[j * hidden + r] connects input j to hidden unit r.
  std::vector<double> w1;
  std::vector<double> b1;  // hidden
  // w2 is class-major: w2[c * hidden + r].
  std::vector<double> w2;
  std::vector<double> b2;  // 2
};

inline constexpr double kProbFloor = 1e-12;

// Scaled-uniform initialization, filled in w1-then-w2 order from an mt19937_64
// stream seeded by init_seed; biases zero. Inputs are unit-norm sparse vectors,
// so the input layer uses a fixed U(-1/2, 1/2) (its effective fan-in is the
// document length, not dim); the output layer uses U(-b, b) with
// b = sqrt(6 / (hidden + 2)).
inline ClassifierState init_classifier(std::int32_t dim, std::int32_t hidden,
                                       std::uint64_t init_seed) {
  if (dim < 1 || hidden < 1)
    throw std::invalid_argument("classifier sizes must be >= 1");
  ClassifierState state;
  state.dim = dim;
  state.hidden = hidden;
  state.init_seed = init_seed;
  state.w1.resize(static_cast<std::size_t>(dim) * hidden);
  state.b1.assign(hidden, 0.0);
  state.w2.resize(2 * static_cast<std::size_t>(hidden));
  state.b2.assign(2, 0.0);
  Rng rng(init_seed);
  const double bound1 = 0.5;
  for (auto& w : state.w1) w = rng.uniform(-bound1, bound1);
  const double bound2 = std::sqrt(6.0 / (static_cast<double>(hidden) + 2.0));
  for (auto& w : state.w2) w = rng.uniform(-bound2, bound2);
  return state;
}

inline ClassifierState copy_params(const ClassifierState& state) { return state; }

namespace detail {

inline void check_input(const ClassifierState& state, const FeatureVector& x) {
  if (x.dim != state.dim)
    throw std::invalid_argument("feature dimension " + std::to_string(x.dim) +
                                " does not match classifier dimension " +
                                std::to_string(state.dim));
}

// Hidden activations and logits in one pass; h must hold `hidden` doubles.
inline std::array<double, 2> forward_hidden(const ClassifierState& state, const FeatureVector& x,
                                            std::span<double> h) {
  const std::int32_t H = state.hidden;
  std::copy(state.b1.begin(), state.b1.end(), h.begin());
  for (const auto& [j, value] : x.entries) {
    const double* row = state.w1.data() + static_cast<std::size_t>(j) * H;
    for (std::int32_t r = 0; r < H; ++r) h[r] += value * row[r];
  }
  for (std::int32_t r = 0; r < H; ++r) h[r] = std::tanh(h[r]);
  std::array<double, 2> z{state.b2[0], state.b2[1]};
  for (std::int32_t r = 0; r < H; ++r) {
    z[0] += state.w2[r] * h[r];
    z[1] += state.w2[H + r] * h[r];
  }
  return z;
}

}  // namespace detail

inline std::array<double, 2> forward(const ClassifierState& state, const FeatureVector& x) {
  detail::check_input(state, x);
  std::vector<double> h(state.hidden);
  return detail::forward_hidden(state, x, h);
}

// Softmax over logits divided by the temperature, computed with max subtraction.
inline std::array<double, 2> tempered_softmax(const std::array<double, 2>& z, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature))
    throw std::invalid_argument("temperature must be positive and finite");
  if (!std::isfinite(z[0]) || !std::isfinite(z[1]))
    throw std::invalid_argument("logits must be finite");
  const double s0 = z[0] / temperature;
  const double s1 = z[1] / temperature;
  const double m = std::max(s0, s1);
  const double e0 = std::exp(s0 - m);
  const double e1 = std::exp(s1 - m);
  const double sum = e0 + e1;
  return {e0 / sum, e1 / sum};
}

struct Prediction {
  std::array<double, 2> logits{};
  std::array<double, 2> probs{};
  double temperature = 1.0;
};

inline Prediction predict(const ClassifierState& state, const FeatureVector& x,
                          double temperature) {
  Prediction p;
  p.logits = forward(state, x);
  p.probs = tempered_softmax(p.logits, temperature);
  p.temperature = temperature;
  return p;
}

inline std::array<double, 2> predict_proba(const ClassifierState& state, const FeatureVector& x,
                                           double temperature) {
  return predict(state, x, temperature).probs;
}

inline std::array<double, 2> ensemble_predict(const std::array<double, 2>& p1,
                                              const std::array<double, 2>& p2) {
  return {0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])};
}

// Ties (p = 0.5) resolve to the negative class.
inline int hard_label(const std::array<double, 2>& probs) { return probs[1] > 0.5 ? 1 : 0; }

// Positive-class probability re-tempered from its temperature-1 value:
// the two-class logit gap is logit(p), and tempering divides the gap by T.
inline double temper_probability(double p_base, double temperature) {
  const double p = std::clamp(p_base, kProbFloor, 1.0 - kProbFloor);
  const double gap = std::log(p / (1.0 - p));
  return 1.0 / (1.0 + std::exp(-gap / temperature));
}

enum class LossMode { Hard, Distill, Combined };

struct LossSpec {
  double lambda = 0.0;       // weight of the distillation term in Combined mode
  double temperature = 1.0;  // T used by the distillation term
  LossMode mode = LossMode::Hard;
};

inline void validate(const LossSpec& spec) {
  if (!(std::isfinite(spec.lambda) && spec.lambda >= 0.0 && spec.lambda <= 1.0))
    throw std::invalid_argument("lambda must be in [0, 1]");
  if (!(std::isfinite(spec.temperature) && spec.temperature >= 1.0))
    throw std::invalid_argument("loss temperature must be >= 1");
}

struct BatchItem {
  const FeatureVector* features = nullptr;
  std::optional<int> label;        // required by Hard and Combined
  std::optional<double> teacher_q;  // teacher positive-class probability at T; Distill only
};

// Gradients mirror the ClassifierState layout. w1 rows that never received a
// contribution are kept at zero; `touched` lists the rows that did, so sgd_step
// and reuse across batches stay proportional to the sparse support.
struct Gradients {
  std::int32_t dim = 0;
  std::int32_t hidden = 0;
  std::vector<double> w1, b1, w2, b2;
  std::vector<std::int32_t> touched;
  std::vector<std::uint8_t> touched_flag;
  bool sparse_w1 = false;

  void reset(const ClassifierState& state) {
    // the fast path relies on untouched rows being zero, which only holds for
    // buffers this struct filled itself
    if (dim != state.dim || hidden != state.hidden || !sparse_w1) {
      dim = state.dim;
      hidden = state.hidden;
      w1.assign(state.w1.size(), 0.0);
      b1.assign(state.b1.size(), 0.0);
      w2.assign(state.w2.size(), 0.0);
      b2.assign(state.b2.size(), 0.0);
      touched.clear();
      touched_flag.assign(dim, 0);
    } else {
      for (std::int32_t j : touched) {
        double* row = w1.data() + static_cast<std::size_t>(j) * hidden;
        std::fill(row, row + hidden, 0.0);
        touched_flag[j] = 0;
      }
      touched.clear();
      std::fill(b1.begin(), b1.end(), 0.0);
      std::fill(w2.begin(), w2.end(), 0.0);
      std::fill(b2.begin(), b2.end(), 0.0);
    }
    sparse_w1 = true;
  }

  void mark(std::int32_t j) {
    if (!touched_flag[j]) {
      touched_flag[j] = 1;
      touched.push_back(j);
    }
  }
};

namespace detail {

inline double cross_entropy2(double target_pos, const std::array<double, 2>& probs) {
  const double a0 = std::max(probs[0], kProbFloor);
  const double a1 = std::max(probs[1], kProbFloor);
  return -((1.0 - target_pos) * std::log(a0) + target_pos * std::log(a1));
}

inline void backprop_item(const ClassifierState& state, const FeatureVector& x,
                          std::span<const double> h, const std::array<double, 2>& dz,
                          Gradients& grads, std::span<double> du) {
  const std::int32_t H = state.hidden;
  grads.b2[0] += dz[0];
  grads.b2[1] += dz[1];
  for (std::int32_t r = 0; r < H; ++r) {
    grads.w2[r] += dz[0] * h[r];
    grads.w2[H + r] += dz[1] * h[r];
    const double dh = state.w2[r] * dz[0] + state.w2[H + r] * dz[1];
    du[r] = dh * (1.0 - h[r] * h[r]);
    grads.b1[r] += du[r];
  }
  for (const auto& [j, value] : x.entries) {
    grads.mark(j);
    double* row = grads.w1.data() + static_cast<std::size_t>(j) * H;
    for (std::int32_t r = 0; r < H; ++r) row[r] += value * du[r];
  }
}

}  // namespace detail

// Mean loss over the batch and its exact gradients.
//   Hard:     cross-entropy against the 0/1 label at temperature 1.
//   Distill:  cross-entropy against the teacher probability q at temperature T;
//             this term's gradient contribution is multiplied by T^2 to offset
//             the 1/T^2 shrinkage the tempered softmax introduces.
//   Combined: (1 - lambda) * Hard + lambda * Distill, with q computed from the
//             teacher model on the same input. lambda = 0 and lambda = 1 take the
//             single-term code paths exactly.
// The returned loss is the unscaled objective value; only gradients carry T^2.
inline double loss_and_grads(const ClassifierState& state, std::span<const BatchItem> batch,
                             const LossSpec& spec, const ClassifierState* teacher,
                             Gradients& grads) {
  validate(spec);
  if (batch.empty()) throw std::invalid_argument("loss over an empty batch");
  const bool want_hard =
      spec.mode == LossMode::Hard || (spec.mode == LossMode::Combined && spec.lambda < 1.0);
  const bool want_distill =
      spec.mode == LossMode::Distill || (spec.mode == LossMode::Combined && spec.lambda > 0.0);
  if (spec.mode == LossMode::Combined && teacher == nullptr)
    throw std::runtime_error("combined loss requires a teacher model");
  if (teacher && teacher->dim != state.dim)
    throw std::invalid_argument("teacher/student dimension mismatch");

  grads.reset(state);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  const double T = spec.temperature;
  std::vector<double> h(state.hidden), du(state.hidden);
  double loss = 0.0;

  for (const BatchItem& item : batch) {
    detail::check_input(state, *item.features);
    const auto z = detail::forward_hidden(state, *item.features, h);
    std::array<double, 2> dz{0.0, 0.0};

    if (want_hard) {
      if (!item.label) throw std::runtime_error("hard loss requires a label");
      const double y = static_cast<double>(*item.label);
      const auto a = tempered_softmax(z, 1.0);
      const double w = spec.mode == LossMode::Hard ? 1.0 : 1.0 - spec.lambda;
      loss += w * inv_n * detail::cross_entropy2(y, a);
      dz[0] += w * inv_n * (a[0] - (1.0 - y));
      dz[1] += w * inv_n * (a[1] - y);
    }
    if (want_distill) {
      double q;
      if (spec.mode == LossMode::Distill) {
        if (!item.teacher_q)
          throw std::runtime_error("distill loss requires teacher probabilities");
        q = *item.teacher_q;
      } else {
        q = predict_proba(*teacher, *item.features, T)[1];
      }
      const auto a = tempered_softmax(z, T);
      const double w = spec.mode == LossMode::Distill ? 1.0 : spec.lambda;
      loss += w * inv_n * detail::cross_entropy2(q, a);
      const double scale = w * inv_n * T;  // (a - q) / T, times the T^2 compensation
      dz[0] += scale * (a[0] - (1.0 - q));
      dz[1] += scale * (a[1] - q);
    }
    detail::backprop_item(state, *item.features, h, dz, grads, du);
  }
  return loss;
}

inline std::pair<double, Gradients> loss_and_grads(const ClassifierState& state,
                                                   std::span<const BatchItem> batch,
                                                   const LossSpec& spec,
                                                   const ClassifierState* teacher = nullptr) {
  Gradients grads;
  const double loss = loss_and_grads(state, batch, spec, teacher, grads);
  return {loss, std::move(grads)};
}

// params <- params - eta * grads
inline void sgd_step(ClassifierState& state, const Gradients& grads, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta))
    throw std::invalid_argument("learning rate must be >= 0");
  if (grads.dim != state.dim || grads.hidden != state.hidden)
    throw std::invalid_argument("gradient/state shape mismatch");
  const std::int32_t H = state.hidden;
  if (grads.sparse_w1) {
    for (std::int32_t j : grads.touched) {
      const std::size_t base = static_cast<std::size_t>(j) * H;
      for (std::int32_t r = 0; r < H; ++r) state.w1[base + r] -= eta * grads.w1[base + r];
    }
  } else {
    for (std::size_t i = 0; i < state.w1.size(); ++i) state.w1[i] -= eta * grads.w1[i];
  }
  for (std::int32_t r = 0; r < H; ++r) state.b1[r] -= eta * grads.b1[r];
  for (std::size_t i = 0; i < state.w2.size(); ++i) state.w2[i] -= eta * grads.w2[i];
  state.b2[0] -= eta * grads.b2[0];
  state.b2[1] -= eta * grads.b2[1];
}

// --- checkpoint serialization (versioned JSON with a shape header) ---

inline nlohmann::json classifier_to_json(const ClassifierState& state) {
  return nlohmann::json{{"format", "spt.classifier"}, {"version", 1},
                        {"dim", state.dim},           {"hidden", state.hidden},
                        {"init_seed", state.init_seed}, {"w1", state.w1},
                        {"b1", state.b1},             {"w2", state.w2},
                        {"b2", state.b2}};
}

inline ClassifierState classifier_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", "") != "spt.classifier")
    throw std::runtime_error("not a classifier checkpoint");
  if (j.value("version", 0) != 1)
    throw std::runtime_error("unsupported classifier checkpoint version");
  ClassifierState state;
  state.dim = j.at("dim").get<std::int32_t>();
  state.hidden = j.at("hidden").get<std::int32_t>();
  state.init_seed = j.at("init_seed").get<std::uint64_t>();
  state.w1 = j.at("w1").get<std::vector<double>>();
  state.b1 = j.at("b1").get<std::vector<double>>();
  state.w2 = j.at("w2").get<std::vector<double>>();
  state.b2 = j.at("b2").get<std::vector<double>>();
  if (state.dim < 1 || state.hidden < 1 ||
      state.w1.size() != static_cast<std::size_t>(state.dim) * state.hidden ||
      state.b1.size() != static_cast<std::size_t>(state.hidden) ||
      state.w2.size() != 2 * static_cast<std::size_t>(state.hidden) || state.b2.size() != 2)
    throw std::runtime_error("classifier checkpoint has inconsistent shapes");
  return state;
}

inline void save_classifier(const ClassifierState& state, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  out << classifier_to_json(state).dump() << '\n';
}

inline ClassifierState load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  nlohmann::json j;
  in >> j;
  return classifier_from_json(j);
}

}  // namespace spt
