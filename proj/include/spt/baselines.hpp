#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spt/config.hpp"
#include "spt/corpus.hpp"
#include "spt/eval.hpp"
#include "spt/features.hpp"
#include "spt/records.hpp"
#include "spt/trainer.hpp"

namespace spt {

// Fresh initialization followed by finetune_epochs of plain cross-entropy over
// the labeled set with a linearly decaying learning rate (the degenerate
// schedule with no plateau). This is both the standalone baseline and the
// bootstrapping engine's starting model.
inline ClassifierState train_supervised(const Corpus& labeled, const EngineConfig& cfg) {
  validate(cfg);
  if (labeled.empty()) throw std::invalid_argument("supervised training needs a non-empty corpus");
  validate_corpus(labeled);
  const auto features = featurize_corpus(labeled, cfg.dim);
  std::vector<BatchItem> items;
  items.reserve(features.size());
  for (std::size_t i = 0; i < features.size(); ++i)
    items.push_back({&features[i], labeled.documents[i].label, std::nullopt});

  ClassifierState model = init_classifier(cfg.dim, cfg.hidden, cfg.init_seed);
  const long total = cfg.finetune_epochs * batches_per_epoch(items.size(), cfg.batch_size);
  const ScheduleSpec schedule{cfg.learning_rate, 0, total};
  Rng shuffle_rng(mix_seed(cfg.sample_seed, seeds::kSupervisedShuffle));
  Gradients grads;
  run_stage(model, items, LossSpec{0.0, 1.0, LossMode::Hard}, nullptr, schedule, 0,
            cfg.finetune_epochs, cfg.batch_size, shuffle_rng, grads);
  return model;
}

struct SelfTrainConfig {
  double theta = 0.9;        // minimum max-class confidence for a candidate
  double growth_cap = 0.10;  // per-iteration additions <= growth_cap * |L'|
  std::optional<int> max_iters;
  EngineConfig base;
};

inline void validate(const SelfTrainConfig& cfg) {
  validate(cfg.base);
  if (!(cfg.theta > 0.5 && cfg.theta <= 1.0))
    throw std::invalid_argument("theta must be in (0.5, 1]");
  if (!(cfg.growth_cap > 0.0 && cfg.growth_cap <= 1.0))
    throw std::invalid_argument("growth_cap must be in (0, 1]");
}

struct SelfTrainIteration {
  IterationRecord record;
  std::vector<std::string> added_ids;
};

struct SelfTrainResult {
  ClassifierState model;
  std::vector<SelfTrainIteration> iterations;
};

// Classic confidence-thresholded self-training with throttling. Each round
// retrains from scratch on the augmented labeled set (same fixed init seed),
// keeps unlabeled documents whose max-class probability clears theta, and
// permanently adds at most floor(growth_cap * |L'|) of them, most confident
// first with ties broken by document id. Added documents never return
// to the pool and never change label.
inline SelfTrainResult run_self_training(const Corpus& labeled, const Corpus& unlabeled,
                                         const SelfTrainConfig& cfg,
                                         const Corpus* test = nullptr) {
  validate(cfg);
  if (labeled.empty()) throw std::invalid_argument("self-training needs a non-empty labeled corpus");

  Corpus pool = labeled;  // L', grows by augmentation
  struct Candidate {
    Document doc;
    FeatureVector features;
  };
  std::vector<Candidate> remaining;
  remaining.reserve(unlabeled.size());
  for (const auto& doc : unlabeled.documents)
    remaining.push_back({doc, featurize(doc.text, cfg.base.dim)});

  std::vector<FeatureVector> test_features;
  if (test) test_features = featurize_corpus(*test, cfg.base.dim);

  SelfTrainResult result;
  result.model = train_supervised(pool, cfg.base);
  int iteration = 0;
  while (true) {
    if (cfg.max_iters && iteration >= *cfg.max_iters) break;
    if (remaining.empty()) break;
    const std::size_t cap =
        static_cast<std::size_t>(cfg.growth_cap * static_cast<double>(pool.size()));
    if (cap == 0) break;

    struct Scored {
      std::size_t index;
      double confidence;
      int label;
    };
    std::vector<Scored> passing;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const auto probs = predict_proba(result.model, remaining[i].features, 1.0);
      const double confidence = std::max(probs[0], probs[1]);
      if (confidence >= cfg.theta) passing.push_back({i, confidence, hard_label(probs)});
    }
    if (passing.empty()) break;
    std::sort(passing.begin(), passing.end(), [&](const Scored& a, const Scored& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      return remaining[a.index].doc.id < remaining[b.index].doc.id;
    });
    if (passing.size() > cap) passing.resize(cap);

    ++iteration;
    SelfTrainIteration round;
    std::vector<bool> taken(remaining.size(), false);
    for (const auto& pick : passing) {
      Document doc = remaining[pick.index].doc;
      doc.label = pick.label;
      round.added_ids.push_back(doc.id);
      pool.documents.push_back(std::move(doc));
      taken[pick.index] = true;
    }
    std::vector<Candidate> next;
    next.reserve(remaining.size() - passing.size());
    for (std::size_t i = 0; i < remaining.size(); ++i)
      if (!taken[i]) next.push_back(std::move(remaining[i]));
    remaining = std::move(next);

    result.model = train_supervised(pool, cfg.base);

    round.record.iteration = iteration;
    round.record.sample_size = pool.size();
    if (test) {
      const Prf prf = evaluate_model(result.model, *test, test_features);
      round.record.has_eval = true;
      round.record.precision = prf.precision;
      round.record.recall = prf.recall;
      round.record.f1 = prf.f1;
    }
    const long total = cfg.base.finetune_epochs * batches_per_epoch(pool.size(), cfg.base.batch_size);
    const ScheduleSpec schedule{cfg.base.learning_rate, 0, total};
    round.record.lr_first = lr_at(schedule, 0);
    round.record.lr_last = lr_at(schedule, total - 1);
    result.iterations.push_back(std::move(round));
  }
  return result;
}

}  // namespace spt
