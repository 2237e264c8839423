#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include "spt/classifier.hpp"
#include "spt/rng.hpp"

using namespace spt;

namespace {

FeatureVector dense_vector(std::vector<double> values) {
  FeatureVector x;
  x.dim = static_cast<std::int32_t>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] != 0.0) x.entries.emplace_back(static_cast<std::int32_t>(i), values[i]);
  return x;
}

FeatureVector random_input(Rng& rng, std::int32_t dim, int nnz) {
  FeatureVector x;
  x.dim = dim;
  std::vector<std::int32_t> idx;
  while (static_cast<int>(idx.size()) < nnz) {
    const auto j = static_cast<std::int32_t>(rng.bounded(dim));
    bool dup = false;
    for (auto k : idx) dup |= k == j;
    if (!dup) idx.push_back(j);
  }
  std::sort(idx.begin(), idx.end());
  for (auto j : idx) x.entries.emplace_back(j, rng.uniform(-1.0, 1.0));
  return x;
}

double entropy2(const std::array<double, 2>& p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

}  // namespace

TEST_CASE("init is deterministic with zero biases") {
  const auto a = init_classifier(32, 8, 42);
  const auto b = init_classifier(32, 8, 42);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  for (double v : a.b1) CHECK(v == 0.0);
  for (double v : a.b2) CHECK(v == 0.0);

  const auto c = init_classifier(32, 8, 43);
  CHECK(a.w1 != c.w1);
  CHECK_THROWS_AS(init_classifier(0, 8, 1), std::invalid_argument);
}

TEST_CASE("forward matches the closed form") {
  auto state = init_classifier(8, 4, 7);
  const auto zero = dense_vector({0, 0, 0, 0, 0, 0, 0, 0});
  const auto z = forward(state, zero);
  CHECK(z[0] == 0.0);  // fresh biases are zero, tanh(0) = 0
  CHECK(z[1] == 0.0);

  ClassifierState tiny;
  tiny.dim = 1;
  tiny.hidden = 1;
  tiny.w1 = {1.0};
  tiny.b1 = {0.0};
  tiny.w2 = {1.0, 1.0};
  tiny.b2 = {0.0, 0.0};
  const auto zt = forward(tiny, dense_vector({1.0}));
  CHECK(zt[0] == Catch::Approx(std::tanh(1.0)).epsilon(1e-15));
  CHECK(zt[1] == Catch::Approx(std::tanh(1.0)).epsilon(1e-15));

  FeatureVector wrong;
  wrong.dim = 5;
  CHECK_THROWS_AS(forward(state, wrong), std::invalid_argument);
}

TEST_CASE("tempered softmax values and identities") {
  const auto even = tempered_softmax({0.0, 0.0}, 4.0);
  CHECK(even[0] == 0.5);
  CHECK(even[1] == 0.5);

  const auto logistic = tempered_softmax({0.0, 1.0}, 1.0);
  CHECK(logistic[1] == Catch::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(logistic[0] == Catch::Approx(0.2689414213699951).epsilon(1e-12));

  const auto scaled = tempered_softmax({0.0, 3.0}, 3.0);
  const auto base = tempered_softmax({0.0, 1.0}, 1.0);
  CHECK(std::abs(scaled[0] - base[0]) < 1e-12);
  CHECK(std::abs(scaled[1] - base[1]) < 1e-12);

  CHECK_THROWS_AS(tempered_softmax({0.0, 0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tempered_softmax({std::nan(""), 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("tempered softmax scaling identity on random logits") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const std::array<double, 2> z{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
    const double T = rng.uniform(1.0, 8.0);
    const auto a = tempered_softmax(z, T);
    const auto b = tempered_softmax({z[0] / T, z[1] / T}, 1.0);
    CHECK(std::abs(a[0] - b[0]) < 1e-12);
    CHECK(a[0] + a[1] == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax entropy is non-decreasing in temperature") {
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const std::array<double, 2> z{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    double prev = -1.0;
    for (double T : {1.0, 2.0, 3.0, 5.0, 9.0}) {
      const double h = entropy2(tempered_softmax(z, T));
      CHECK(h >= prev - 1e-12);
      prev = h;
    }
  }
}

TEST_CASE("predict_proba pulls toward 0.5 as temperature grows") {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto state = init_classifier(16, 4, 100 + i);
    const auto x = random_input(rng, 16, 4);
    const auto z = forward(state, x);
    if (std::abs(z[0] - z[1]) < 1e-9) continue;
    double prev_gap = 1.0;
    for (double T : {1.0, 2.0, 4.0, 8.0}) {
      const double gap = std::abs(predict_proba(state, x, T)[1] - 0.5);
      CHECK(gap < prev_gap);
      prev_gap = gap;
    }
  }
}

TEST_CASE("combined loss endpoints match pure modes") {
  Rng rng(9);
  const auto student = init_classifier(16, 4, 1);
  const auto teacher = init_classifier(16, 4, 2);
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 6; ++i) xs.push_back(random_input(rng, 16, 4));
  std::vector<BatchItem> batch;
  for (int i = 0; i < 6; ++i) batch.push_back({&xs[i], i % 2, std::nullopt});

  const auto [hard_loss, hard_grads] =
      loss_and_grads(student, batch, LossSpec{0.0, 3.0, LossMode::Hard}, nullptr);
  const auto [combined0_loss, combined0_grads] =
      loss_and_grads(student, batch, LossSpec{0.0, 3.0, LossMode::Combined}, &teacher);
  CHECK(combined0_loss == hard_loss);
  CHECK(combined0_grads.w1 == hard_grads.w1);
  CHECK(combined0_grads.b1 == hard_grads.b1);
  CHECK(combined0_grads.w2 == hard_grads.w2);
  CHECK(combined0_grads.b2 == hard_grads.b2);

  std::vector<BatchItem> distill_batch;
  for (int i = 0; i < 6; ++i)
    distill_batch.push_back({&xs[i], std::nullopt, predict_proba(teacher, xs[i], 3.0)[1]});
  const auto [distill_loss, distill_grads] =
      loss_and_grads(student, distill_batch, LossSpec{0.0, 3.0, LossMode::Distill}, nullptr);
  const auto [combined1_loss, combined1_grads] =
      loss_and_grads(student, batch, LossSpec{1.0, 3.0, LossMode::Combined}, &teacher);
  CHECK(combined1_loss == Catch::Approx(distill_loss).epsilon(1e-15));
  for (std::size_t i = 0; i < distill_grads.w2.size(); ++i)
    CHECK(combined1_grads.w2[i] == Catch::Approx(distill_grads.w2[i]).margin(1e-18));
}

TEST_CASE("combined loss of symmetric predictions equals ln 2") {
  // zero input and zero-bias fresh states give a = q = [0.5, 0.5]
  const auto student = init_classifier(4, 3, 1);
  const auto teacher = init_classifier(4, 3, 2);
  FeatureVector zero;
  zero.dim = 4;
  std::vector<BatchItem> batch{{&zero, 1, std::nullopt}};
  const auto [loss, grads] =
      loss_and_grads(student, batch, LossSpec{0.3, 3.0, LossMode::Combined}, &teacher);
  CHECK(loss == Catch::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("combined loss is a convex combination of its endpoints") {
  Rng rng(10);
  const auto student = init_classifier(24, 6, 3);
  const auto teacher = init_classifier(24, 6, 4);
  std::vector<FeatureVector> xs;
  for (int i = 0; i < 8; ++i) xs.push_back(random_input(rng, 24, 5));
  std::vector<BatchItem> batch;
  for (int i = 0; i < 8; ++i) batch.push_back({&xs[i], (i * 3) % 2, std::nullopt});

  const LossSpec at0{0.0, 3.0, LossMode::Combined};
  const LossSpec at1{1.0, 3.0, LossMode::Combined};
  const double loss0 = loss_and_grads(student, batch, at0, &teacher).first;
  const double loss1 = loss_and_grads(student, batch, at1, &teacher).first;
  for (double lambda : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double mixed =
        loss_and_grads(student, batch, LossSpec{lambda, 3.0, LossMode::Combined}, &teacher).first;
    CHECK(mixed == Catch::Approx((1.0 - lambda) * loss0 + lambda * loss1).margin(1e-10));
  }
}

TEST_CASE("loss modes reject missing ingredients") {
  const auto student = init_classifier(4, 2, 1);
  FeatureVector x;
  x.dim = 4;
  x.entries = {{0, 1.0}};
  std::vector<BatchItem> unlabeled{{&x, std::nullopt, std::nullopt}};
  std::vector<BatchItem> labeled{{&x, 1, std::nullopt}};
  Gradients grads;
  CHECK_THROWS_AS(loss_and_grads(student, unlabeled, LossSpec{0.0, 1.0, LossMode::Hard}, nullptr),
                  std::runtime_error);
  CHECK_THROWS_AS(
      loss_and_grads(student, unlabeled, LossSpec{0.0, 3.0, LossMode::Distill}, nullptr),
      std::runtime_error);
  CHECK_THROWS_AS(
      loss_and_grads(student, labeled, LossSpec{0.5, 3.0, LossMode::Combined}, nullptr),
      std::runtime_error);
  CHECK_THROWS_AS(
      loss_and_grads(student, labeled, LossSpec{1.5, 3.0, LossMode::Combined}, &student),
      std::invalid_argument);
}

TEST_CASE("sgd_step applies params minus eta times grads") {
  auto state = init_classifier(6, 3, 11);
  const auto original = copy_params(state);

  Gradients grads;
  grads.reset(state);
  grads.sparse_w1 = false;
  sgd_step(state, grads, 0.0);
  CHECK(state.w1 == original.w1);

  // grads equal to the parameters with eta = 1 zero the state
  grads.w1 = state.w1;
  grads.b1 = state.b1;
  grads.w2 = state.w2;
  grads.b2 = state.b2;
  auto zeroed = copy_params(state);
  sgd_step(zeroed, grads, 1.0);
  for (double v : zeroed.w1) CHECK(v == 0.0);
  for (double v : zeroed.w2) CHECK(v == 0.0);

  // two half steps on constant grads equal one full step
  auto two_half = copy_params(original);
  sgd_step(two_half, grads, 0.5);
  sgd_step(two_half, grads, 0.5);
  auto one_full = copy_params(original);
  sgd_step(one_full, grads, 1.0);
  for (std::size_t i = 0; i < one_full.w1.size(); ++i)
    CHECK(two_half.w1[i] == Catch::Approx(one_full.w1[i]).margin(1e-15));

  CHECK_THROWS_AS(sgd_step(state, grads, -0.1), std::invalid_argument);
}

TEST_CASE("copy_params produces an independent deep copy") {
  auto original = init_classifier(8, 4, 5);
  auto copy = copy_params(original);
  CHECK(copy.w1 == original.w1);

  FeatureVector x;
  x.dim = 8;
  x.entries = {{1, 0.7}, {3, -0.4}};
  const auto before = forward(original, x);
  CHECK(forward(copy, x) == before);

  copy.w1[0] += 1.0;  // mutate the copy only
  CHECK(forward(original, x) == before);
}

TEST_CASE("ensemble_predict averages componentwise") {
  const auto mean = ensemble_predict({0.6, 0.4}, {0.8, 0.2});
  CHECK(mean[0] == Catch::Approx(0.7).epsilon(1e-15));
  CHECK(mean[1] == Catch::Approx(0.3).epsilon(1e-15));
  const auto same = ensemble_predict({0.25, 0.75}, {0.25, 0.75});
  CHECK(same[0] == 0.25);
  CHECK(mean[0] + mean[1] == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("checkpoint serialization round trips bit for bit") {
  const auto state = init_classifier(12, 5, 77);
  const auto path = std::filesystem::temp_directory_path() / "spt_checkpoint.json";
  save_classifier(state, path);
  const auto loaded = load_classifier(path);
  CHECK(loaded.dim == state.dim);
  CHECK(loaded.hidden == state.hidden);
  CHECK(loaded.init_seed == state.init_seed);
  CHECK(loaded.w1 == state.w1);
  CHECK(loaded.b1 == state.b1);
  CHECK(loaded.w2 == state.w2);
  CHECK(loaded.b2 == state.b2);

  auto j = classifier_to_json(state);
  j["w1"].erase(0);
  CHECK_THROWS_AS(classifier_from_json(j), std::runtime_error);
}
