#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <json.hpp>

namespace spt {

// Knobs of one bootstrapping run. Defaults are sized for the bundled synthetic
// benchmark (a few thousand unlabeled documents); see README for the settings
// typically used at 10k-document scale.
struct EngineConfig {
  std::int64_t k = 500;          // unlabeled documents added to the sample per iteration
  double temperature = 3.0;      // T
  double lambda = 0.3;           // weight of the distillation term in the finetune loss
  double alpha = 0.1;            // inertia of the pseudo-label class distributions
  int pretrain_epochs = 1;       // passes over the pseudo-label set (stage 1)
  int finetune_epochs = 3;       // passes over the labeled set (stage 2)
  int batch_size = 32;
  double learning_rate = 0.5;    // R, the schedule plateau
  std::int32_t dim = 4096;       // hashed feature space size
  std::int32_t hidden = 64;
  std::uint64_t init_seed = 1;
  std::uint64_t sample_seed = 1;
  bool disable_two_stage = false;
  bool disable_trapezoid = false;
  bool disable_distill = false;
  bool disable_inertia = false;
};

inline void validate(const EngineConfig& cfg) {
  if (cfg.k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(std::isfinite(cfg.temperature) && cfg.temperature >= 1.0))
    throw std::invalid_argument("temperature must be >= 1");
  if (!(std::isfinite(cfg.lambda) && cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
    throw std::invalid_argument("lambda must be in [0, 1]");
  if (!(std::isfinite(cfg.alpha) && cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw std::invalid_argument("alpha must be in [0, 1]");
  if (cfg.pretrain_epochs < 1) throw std::invalid_argument("pretrain_epochs must be >= 1");
  if (cfg.finetune_epochs < 1) throw std::invalid_argument("finetune_epochs must be >= 1");
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (!(std::isfinite(cfg.learning_rate) && cfg.learning_rate > 0.0))
    throw std::invalid_argument("learning_rate must be positive");
  if (cfg.dim < 2) throw std::invalid_argument("dim must be >= 2");
  if (cfg.hidden < 1) throw std::invalid_argument("hidden must be >= 1");
}

inline nlohmann::json to_json(const EngineConfig& cfg) {
  return nlohmann::json{{"k", cfg.k},
                        {"temperature", cfg.temperature},
                        {"lambda", cfg.lambda},
                        {"alpha", cfg.alpha},
                        {"pretrain_epochs", cfg.pretrain_epochs},
                        {"finetune_epochs", cfg.finetune_epochs},
                        {"batch_size", cfg.batch_size},
                        {"learning_rate", cfg.learning_rate},
                        {"dim", cfg.dim},
                        {"hidden", cfg.hidden},
                        {"init_seed", cfg.init_seed},
                        {"sample_seed", cfg.sample_seed},
                        {"disable_two_stage", cfg.disable_two_stage},
                        {"disable_trapezoid", cfg.disable_trapezoid},
                        {"disable_distill", cfg.disable_distill},
                        {"disable_inertia", cfg.disable_inertia}};
}

}  // namespace spt
