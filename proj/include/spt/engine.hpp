#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "spt/baselines.hpp"
#include "spt/classifier.hpp"
#include "spt/config.hpp"
#include "spt/corpus.hpp"
#include "spt/eval.hpp"
#include "spt/features.hpp"
#include "spt/inertia.hpp"
#include "spt/records.hpp"
#include "spt/trainer.hpp"

namespace spt {

// Teacher soft labels for a drawn set of unlabeled documents: the tempered
// distribution at T plus the temperature-1 positive-class probability and the
// recorded argmax class (ties resolve negative).
inline PseudoLabelSet pseudo_label(const ClassifierState& teacher,
                                   const std::vector<const Document*>& documents,
                                   double temperature) {
  PseudoLabelSet set;
  set.temperature = temperature;
  set.items.reserve(documents.size());
  for (const Document* doc : documents) {
    PseudoLabel item;
    item.doc_id = doc->id;
    item.features = featurize(doc->text, teacher.dim);
    const auto z = forward(teacher, item.features);
    item.prob_base = tempered_softmax(z, 1.0)[1];
    item.prob_tempered = tempered_softmax(z, temperature)[1];
    item.assigned = item.prob_base > 0.5 ? 1 : 0;
    set.items.push_back(std::move(item));
  }
  return set;
}

inline PseudoLabelSet pseudo_label(const ClassifierState& teacher, const Corpus& documents,
                                   double temperature) {
  std::vector<const Document*> ptrs;
  ptrs.reserve(documents.size());
  for (const auto& doc : documents.documents) ptrs.push_back(&doc);
  return pseudo_label(teacher, ptrs, temperature);
}

// Batch-count bookkeeping for one student training run.
struct StagePlan {
  ScheduleSpec schedule;
  long pretrain_batches = 0;  // stage-1 batches (0 in single-stage mode)
  long total_batches = 0;
};

inline StagePlan plan_stages(const EngineConfig& cfg, std::size_t pseudo_count,
                             std::size_t labeled_count) {
  StagePlan plan;
  if (cfg.disable_two_stage) {
    plan.pretrain_batches = 0;
    plan.total_batches =
        cfg.finetune_epochs * batches_per_epoch(pseudo_count + labeled_count, cfg.batch_size);
    plan.schedule = ScheduleSpec{cfg.learning_rate, 0, plan.total_batches};
    return plan;
  }
  const long pretrain = cfg.pretrain_epochs * batches_per_epoch(pseudo_count, cfg.batch_size);
  const long finetune = cfg.finetune_epochs * batches_per_epoch(labeled_count, cfg.batch_size);
  plan.pretrain_batches = pretrain;
  plan.total_batches = pretrain + finetune;
  plan.schedule = cfg.disable_trapezoid
                      ? ScheduleSpec{cfg.learning_rate, 0, pretrain + finetune}
                      : ScheduleSpec{cfg.learning_rate, pretrain, finetune};
  return plan;
}

// One student (M1) training run from a fresh fixed initialization.
// Stage 1 pretrains on the pseudo-label set with the distillation loss against
// the teacher's (possibly inertia-transformed) soft labels on the schedule
// plateau; stage 2 finetunes on the labeled set with the combined loss while
// the schedule descends. Ablations:
//   disable_two_stage: one stage over the shuffled union (pseudo as hard
//     argmax labels plus gold labels) under plain linear decay;
//   disable_trapezoid: both stages run, learning rate decays linearly from R
//     across all batches;
//   disable_distill:   stage-1 targets become hard argmax labels and the
//     finetune loss drops its distillation term (lambda forced to 0).
inline ClassifierState two_stage_train(std::uint64_t init_seed, const PseudoLabelSet& pseudo,
                                       const Corpus& labeled, const ClassifierState& teacher,
                                       const EngineConfig& cfg, std::uint64_t shuffle_seed) {
  validate(cfg);
  if (labeled.empty())
    throw std::invalid_argument("two-stage training needs a non-empty labeled corpus");
  if (teacher.dim != cfg.dim || teacher.hidden != cfg.hidden)
    throw std::invalid_argument("teacher dimensions do not match the configuration");
  for (const auto& item : pseudo.items)
    if (item.features.dim != cfg.dim)
      throw std::invalid_argument("pseudo-label features do not match the configuration");

  ClassifierState student = init_classifier(cfg.dim, cfg.hidden, init_seed);
  const auto labeled_features = featurize_corpus(labeled, cfg.dim);
  std::vector<BatchItem> labeled_items;
  labeled_items.reserve(labeled.size());
  for (std::size_t i = 0; i < labeled.size(); ++i)
    labeled_items.push_back({&labeled_features[i], labeled.documents[i].label, std::nullopt});

  const StagePlan plan = plan_stages(cfg, pseudo.items.size(), labeled.size());
  Rng shuffle_rng(shuffle_seed);
  Gradients grads;

  if (cfg.disable_two_stage) {
    std::vector<BatchItem> union_items;
    union_items.reserve(pseudo.items.size() + labeled_items.size());
    for (const auto& item : pseudo.items)
      union_items.push_back({&item.features, item.assigned, std::nullopt});
    union_items.insert(union_items.end(), labeled_items.begin(), labeled_items.end());
    run_stage(student, union_items, LossSpec{0.0, 1.0, LossMode::Hard}, nullptr, plan.schedule, 0,
              cfg.finetune_epochs, cfg.batch_size, shuffle_rng, grads);
    return student;
  }

  std::vector<BatchItem> pseudo_items;
  pseudo_items.reserve(pseudo.items.size());
  for (const auto& item : pseudo.items) {
    if (cfg.disable_distill)
      pseudo_items.push_back({&item.features, item.assigned, std::nullopt});
    else
      pseudo_items.push_back({&item.features, std::nullopt, item.prob_tempered});
  }
  const LossSpec stage1 = cfg.disable_distill
                              ? LossSpec{0.0, 1.0, LossMode::Hard}
                              : LossSpec{0.0, cfg.temperature, LossMode::Distill};
  long t = run_stage(student, pseudo_items, stage1, nullptr, plan.schedule, 0,
                     cfg.pretrain_epochs, cfg.batch_size, shuffle_rng, grads);

  const double lambda = cfg.disable_distill ? 0.0 : cfg.lambda;
  const LossSpec stage2{lambda, cfg.temperature, LossMode::Combined};
  run_stage(student, labeled_items, stage2, &teacher, plan.schedule, t, cfg.finetune_epochs,
            cfg.batch_size, shuffle_rng, grads);
  return student;
}

struct SelfPretrainResult {
  ClassifierState m1;
  ClassifierState m2;
  std::vector<IterationRecord> records;
};

// Observer invoked after each iteration's training, mainly for tests and
// checkpointing; `teacher` is the copy made at the top of the iteration.
struct IterationView {
  int iteration;
  const ClassifierState& teacher;
  const ClassifierState& student;
  const PseudoLabelSet& labels;
};
using IterationObserver = std::function<void(const IterationView&)>;

// The dual-model bootstrapping loop. M1 starts as the supervised model; while
// the drawn sample has not yet covered the unlabeled pool, the previous M1
// becomes the teacher M2, a fresh uniform sample of min(iteration * k, |U|)
// documents is soft-labeled, the inertia transform damps the label
// distributions, and a new M1 is trained from the fixed initialization. M1 is
// evaluated on `test` after every iteration; the final ensemble is the mean of
// M1 and M2 predictions.
inline SelfPretrainResult run_self_pretraining(const Corpus& labeled, const Corpus& unlabeled,
                                               const EngineConfig& cfg,
                                               const Corpus* test = nullptr,
                                               const IterationObserver& observer = {}) {
  validate(cfg);
  if (labeled.empty())
    throw std::invalid_argument("self-pretraining needs a non-empty labeled corpus");
  validate_corpus(labeled);

  std::vector<FeatureVector> test_features;
  if (test) test_features = featurize_corpus(*test, cfg.dim);

  SelfPretrainResult result;
  result.m1 = train_supervised(labeled, cfg);
  result.m2 = copy_params(result.m1);

  const std::size_t pool_size = unlabeled.size();
  std::size_t accumulated = 0;
  std::optional<ClassMoments> prev_moments;
  int iteration = 0;

  while (accumulated < pool_size) {
    ++iteration;
    result.m2 = copy_params(result.m1);
    accumulated += static_cast<std::size_t>(cfg.k);
    const std::size_t sample_size = std::min(accumulated, pool_size);

    Rng sample_rng(mix_seed(cfg.sample_seed, seeds::iteration_sample(iteration)));
    std::vector<const Document*> drawn;
    drawn.reserve(sample_size);
    for (std::size_t index : sample_rng.sample_indices(pool_size, sample_size))
      drawn.push_back(&unlabeled.documents[index]);

    PseudoLabelSet pseudo = pseudo_label(result.m2, drawn, cfg.temperature);
    ClassMoments applied;
    if (cfg.disable_inertia) {
      applied = compute_moments(pseudo);
    } else {
      auto [transformed, moments] = apply_inertia(prev_moments, std::move(pseudo), cfg.alpha);
      pseudo = std::move(transformed);
      applied = moments;
      prev_moments = moments;
    }

    result.m1 = two_stage_train(cfg.init_seed, pseudo, labeled, result.m2, cfg,
                                mix_seed(cfg.sample_seed, seeds::iteration_shuffle(iteration)));

    IterationRecord record;
    record.iteration = iteration;
    record.sample_size = sample_size;
    record.moments = applied;
    const StagePlan plan = plan_stages(cfg, pseudo.items.size(), labeled.size());
    record.lr_first = lr_at(plan.schedule, 0);
    record.lr_last = lr_at(plan.schedule, plan.total_batches - 1);
    if (test) {
      const Prf prf = evaluate_model(result.m1, *test, test_features);
      record.has_eval = true;
      record.precision = prf.precision;
      record.recall = prf.recall;
      record.f1 = prf.f1;
    }
    result.records.push_back(record);
    if (observer) observer({iteration, result.m2, result.m1, pseudo});
  }
  return result;
}

// Ensemble prediction over raw documents: the mean of both models'
// temperature-1 class distributions.
inline std::vector<std::array<double, 2>> predict_ensemble(const ClassifierState& m1,
                                                           const ClassifierState& m2,
                                                           const std::vector<Document>& docs) {
  std::vector<std::array<double, 2>> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    const FeatureVector x = featurize(doc.text, m1.dim);
    out.push_back(ensemble_predict(predict_proba(m1, x, 1.0), predict_proba(m2, x, 1.0)));
  }
  return out;
}

}  // namespace spt
