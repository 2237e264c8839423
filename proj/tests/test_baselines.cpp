#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "spt/baselines.hpp"
#include "spt/eval.hpp"
#include "spt/sampling.hpp"

using namespace spt;

namespace {

EngineConfig tiny_config() {
  EngineConfig cfg;
  cfg.dim = 512;
  cfg.hidden = 8;
  cfg.batch_size = 16;
  cfg.init_seed = 3;
  cfg.sample_seed = 4;
  return cfg;
}

}  // namespace

TEST_CASE("supervised training separates a disjoint-vocabulary corpus") {
  auto cfg = tiny_config();
  cfg.finetune_epochs = 10;  // ample data and ample passes: training F1 should saturate
  const Corpus corpus = gen_synthetic(120, 80, 80, 0.0, 8, 29);
  const auto model = train_supervised(corpus, cfg);
  const Prf on_train = evaluate_model(model, corpus);
  CHECK(on_train.f1 >= 0.99);

  CHECK_THROWS_AS(train_supervised(Corpus{}, cfg), std::invalid_argument);
}

TEST_CASE("a supervised classifier clears F1 0.9 at moderate vocabulary overlap") {
  // this oracle gates the synthetic generator's default overlap (0.4)
  EngineConfig cfg;
  cfg.finetune_epochs = 15;
  cfg.learning_rate = 1.0;
  for (double overlap : {0.3, 0.4}) {
    CAPTURE(overlap);
    const Corpus pool = gen_synthetic(1000, 500, 500, overlap, 12, 17);
    const auto [train, held_out] = stratified_sample(pool, 800, 18);
    const auto model = train_supervised(train, cfg);
    CHECK(evaluate_model(model, held_out).f1 > 0.9);
  }
}

TEST_CASE("supervised training is deterministic") {
  const auto cfg = tiny_config();
  const Corpus corpus = gen_synthetic(100, 40, 40, 0.3, 6, 31);
  const auto a = train_supervised(corpus, cfg);
  const auto b = train_supervised(corpus, cfg);
  CHECK(a.w1 == b.w1);
  CHECK(a.b1 == b.b1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b2 == b.b2);
}

TEST_CASE("duplicating every document keeps the decisions on separable data") {
  auto cfg = tiny_config();
  cfg.finetune_epochs = 10;  // train both models to convergence before comparing
  const Corpus corpus = gen_synthetic(80, 50, 50, 0.0, 7, 37);
  Corpus doubled = corpus;
  for (const auto& doc : corpus.documents) {
    Document dup = doc;
    dup.id += "-copy";
    doubled.documents.push_back(std::move(dup));
  }
  const auto original = train_supervised(corpus, cfg);
  const auto duplicated = train_supervised(doubled, cfg);

  Corpus eval = gen_synthetic(80, 25, 25, 0.0, 7, 38);
  const auto eval_features = featurize_corpus(eval, cfg.dim);
  CHECK(predict_labels(original, eval_features) == predict_labels(duplicated, eval_features));
}

TEST_CASE("self-training with theta one is the supervised baseline") {
  const auto cfg = tiny_config();
  const Corpus pool = gen_synthetic(100, 60, 60, 0.3, 6, 41);
  auto [labeled, rest] = stratified_sample(pool, 40, 42);
  const Corpus unlabeled = strip_labels(std::move(rest));

  SelfTrainConfig st;
  st.base = cfg;
  st.theta = 1.0;
  const auto result = run_self_training(labeled, unlabeled, st);
  CHECK(result.iterations.empty());
  const auto supervised = train_supervised(labeled, cfg);
  CHECK(result.model.w1 == supervised.w1);
  CHECK(result.model.b2 == supervised.b2);
}

TEST_CASE("self-training throttles additions to the growth cap") {
  const auto cfg = tiny_config();
  const Corpus pool = gen_synthetic(120, 180, 180, 0.1, 6, 43);
  auto [labeled, rest] = stratified_sample(pool, 300, 44);
  const Corpus unlabeled = strip_labels(std::move(rest));
  REQUIRE(labeled.size() == 300);

  SelfTrainConfig st;
  st.base = cfg;
  st.theta = 0.6;  // easy threshold so the cap binds
  st.growth_cap = 0.10;
  st.max_iters = 1;
  const auto result = run_self_training(labeled, unlabeled, st);
  REQUIRE(result.iterations.size() == 1);
  CHECK(result.iterations[0].added_ids.size() <= 30);
  CHECK(result.iterations[0].record.sample_size ==
        labeled.size() + result.iterations[0].added_ids.size());
}

TEST_CASE("self-training additions are permanent and unique") {
  const auto cfg = tiny_config();
  const Corpus pool = gen_synthetic(90, 50, 50, 0.2, 6, 47);
  auto [labeled, rest] = stratified_sample(pool, 30, 48);
  const Corpus unlabeled = strip_labels(std::move(rest));

  SelfTrainConfig st;
  st.base = cfg;
  st.theta = 0.7;
  st.max_iters = 6;
  const auto result = run_self_training(labeled, unlabeled, st, nullptr);

  std::set<std::string> seen;
  std::size_t previous_size = labeled.size();
  for (const auto& round : result.iterations) {
    CHECK(round.record.sample_size > previous_size);  // |L'| strictly increases
    previous_size = round.record.sample_size;
    for (const auto& id : round.added_ids) CHECK(seen.insert(id).second);
  }

  SelfTrainConfig bad = st;
  bad.theta = 0.4;
  CHECK_THROWS_AS(run_self_training(labeled, unlabeled, bad), std::invalid_argument);
}

TEST_CASE("self-training is deterministic") {
  const auto cfg = tiny_config();
  const Corpus pool = gen_synthetic(90, 50, 50, 0.25, 6, 53);
  auto [labeled, rest] = stratified_sample(pool, 30, 54);
  const Corpus unlabeled = strip_labels(std::move(rest));

  SelfTrainConfig st;
  st.base = cfg;
  st.theta = 0.8;
  st.max_iters = 3;
  const auto a = run_self_training(labeled, unlabeled, st);
  const auto b = run_self_training(labeled, unlabeled, st);
  CHECK(a.model.w1 == b.model.w1);
  REQUIRE(a.iterations.size() == b.iterations.size());
  for (std::size_t i = 0; i < a.iterations.size(); ++i)
    CHECK(a.iterations[i].added_ids == b.iterations[i].added_ids);
}
