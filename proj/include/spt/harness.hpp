#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spt/baselines.hpp"
#include "spt/config.hpp"
#include "spt/corpus.hpp"
#include "spt/engine.hpp"
#include "spt/manifest.hpp"
#include "spt/metrics.hpp"
#include "spt/records.hpp"
#include "spt/sampling.hpp"

namespace spt {

inline constexpr const char* kArmSupervised = "supervised";
inline constexpr const char* kArmSelfTraining = "self_training";
inline constexpr const char* kArmSelfPretraining = "self_pretraining";

inline bool is_known_arm(const std::string& arm) {
  return arm == kArmSupervised || arm == kArmSelfTraining || arm == kArmSelfPretraining;
}

// One multi-seed comparison: per seed, a stratified labeled subset is drawn
// once and shared by every arm, trained, and scored on the test corpus.
struct ExperimentSpec {
  std::size_t labeled_budget = 100;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<std::string> arms{kArmSupervised, kArmSelfPretraining};
  EngineConfig engine;
  double theta = 0.9;        // self-training confidence threshold
  double growth_cap = 0.10;  // self-training throttle
  std::optional<int> max_iters;
  int jobs = 1;
  bool keep_models = false;
};

struct CorpusBundle {
  Corpus pool;       // labeled pool the budget is sampled from
  Corpus unlabeled;  // U
  Corpus test;
};

inline nlohmann::json to_json(const ExperimentSpec& spec) {
  nlohmann::json j{{"labeled_budget", spec.labeled_budget},
                   {"seeds", spec.seeds},
                   {"arms", spec.arms},
                   {"engine", to_json(spec.engine)},
                   {"theta", spec.theta},
                   {"growth_cap", spec.growth_cap}};
  if (spec.max_iters) j["max_iters"] = *spec.max_iters;
  else j["max_iters"] = nullptr;
  return j;
}

// jobs is execution detail, not configuration: it never enters the fingerprint.
inline std::string fingerprint(const ExperimentSpec& spec) {
  return fingerprint_json(to_json(spec));
}

struct MetricsReport {
  std::string fingerprint;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> arms;
  std::map<std::string, std::vector<Prf>> per_seed;  // arm -> metrics aligned with seeds
  std::map<std::string, Prf> mean;
};

struct ArmRun {
  std::string arm;
  std::uint64_t seed = 0;
  Prf metrics;
  std::vector<IterationRecord> records;  // bootstrapping arms only
  std::vector<std::pair<std::string, ClassifierState>> models;  // when keep_models is set
};

struct ExperimentResult {
  MetricsReport report;
  std::vector<ArmRun> runs;  // ordered by (arm order in spec, seed order)
};

namespace detail {

// Mean independent of seed order: components are sorted before summation so
// permuting the seed list cannot change the floating-point result.
inline Prf order_free_mean(std::vector<Prf> values) {
  auto mean_of = [&](auto field) {
    std::vector<double> xs;
    xs.reserve(values.size());
    for (const auto& v : values) xs.push_back(v.*field);
    std::sort(xs.begin(), xs.end());
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
  };
  Prf out;
  out.precision = mean_of(&Prf::precision);
  out.recall = mean_of(&Prf::recall);
  out.f1 = mean_of(&Prf::f1);
  return out;
}

inline ArmRun run_arm(const std::string& arm, std::uint64_t seed, const ExperimentSpec& spec,
                      const CorpusBundle& data) {
  // Derive per-seed streams so arms share the identical labeled subset while
  // training randomness still varies per experiment seed.
  const auto [labeled, rest] = stratified_sample(data.pool, spec.labeled_budget,
                                                 mix_seed(seed, 0));
  (void)rest;
  EngineConfig cfg = spec.engine;
  cfg.init_seed = mix_seed(spec.engine.init_seed, seed);
  cfg.sample_seed = mix_seed(spec.engine.sample_seed, seed);

  const auto test_features = featurize_corpus(data.test, cfg.dim);
  ArmRun run;
  run.arm = arm;
  run.seed = seed;
  if (arm == kArmSupervised) {
    ClassifierState model = train_supervised(labeled, cfg);
    run.metrics = evaluate_model(model, data.test, test_features);
    if (spec.keep_models) run.models.emplace_back("model", std::move(model));
  } else if (arm == kArmSelfTraining) {
    SelfTrainConfig st{spec.theta, spec.growth_cap, spec.max_iters, cfg};
    SelfTrainResult result = run_self_training(labeled, data.unlabeled, st, &data.test);
    run.metrics = evaluate_model(result.model, data.test, test_features);
    for (auto& it : result.iterations) run.records.push_back(it.record);
    if (spec.keep_models) run.models.emplace_back("model", std::move(result.model));
  } else if (arm == kArmSelfPretraining) {
    SelfPretrainResult result = run_self_pretraining(labeled, data.unlabeled, cfg, &data.test);
    run.metrics = evaluate_ensemble(result.m1, result.m2, data.test, test_features);
    run.records = std::move(result.records);
    if (spec.keep_models) {
      run.models.emplace_back("m1", std::move(result.m1));
      run.models.emplace_back("m2", std::move(result.m2));
    }
  } else {
    throw std::invalid_argument("unknown arm: " + arm);
  }
  return run;
}

}  // namespace detail

inline void validate(const ExperimentSpec& spec, const CorpusBundle& data) {
  validate(spec.engine);
  if (spec.seeds.empty()) throw std::invalid_argument("seed list must be non-empty");
  if (spec.arms.empty()) throw std::invalid_argument("arm list must be non-empty");
  for (const auto& arm : spec.arms)
    if (!is_known_arm(arm)) throw std::invalid_argument("unknown arm: " + arm);
  if (spec.labeled_budget == 0 || spec.labeled_budget > data.pool.size())
    throw std::invalid_argument("labeled budget out of range for the pool");
  if (data.test.empty()) throw std::invalid_argument("test corpus must be non-empty");
  validate_corpus(data.pool);
  validate_corpus(data.unlabeled);
  validate_corpus(data.test);
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec, const CorpusBundle& data) {
  validate(spec, data);

  struct Unit {
    std::string arm;
    std::uint64_t seed;
  };
  std::vector<Unit> units;
  for (const auto& arm : spec.arms)
    for (std::uint64_t seed : spec.seeds) units.push_back({arm, seed});

  std::vector<ArmRun> runs(units.size());
  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < units.size(); ++i)
      runs[i] = detail::run_arm(units[i].arm, units[i].seed, spec, data);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= units.size()) return;
        try {
          runs[i] = detail::run_arm(units[i].arm, units[i].seed, spec, data);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  ExperimentResult result;
  result.runs = std::move(runs);
  result.report.fingerprint = fingerprint(spec);
  result.report.seeds = spec.seeds;
  result.report.arms = spec.arms;
  for (const auto& run : result.runs) result.report.per_seed[run.arm].push_back(run.metrics);
  for (const auto& arm : spec.arms)
    result.report.mean[arm] = detail::order_free_mean(result.report.per_seed[arm]);
  return result;
}

// --- report emission ---

namespace detail {

inline std::string format_metric(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

}  // namespace detail

inline std::string report_csv(const MetricsReport& report) {
  std::string out = "\"arm\",\"seed\",\"precision\",\"recall\",\"f1\"\n";
  for (const auto& arm : report.arms) {
    const auto& rows = report.per_seed.at(arm);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out += "\"" + arm + "\",\"" + std::to_string(report.seeds[i]) + "\"," +
             detail::format_metric(rows[i].precision) + ',' +
             detail::format_metric(rows[i].recall) + ',' + detail::format_metric(rows[i].f1) +
             '\n';
    }
    const Prf& mean = report.mean.at(arm);
    out += "\"" + arm + "\",\"mean\"," + detail::format_metric(mean.precision) + ',' +
           detail::format_metric(mean.recall) + ',' + detail::format_metric(mean.f1) + '\n';
  }
  return out;
}

inline nlohmann::json report_json(const MetricsReport& report) {
  nlohmann::json arms = nlohmann::json::object();
  for (const auto& arm : report.arms) {
    nlohmann::json per_seed = nlohmann::json::object();
    const auto& rows = report.per_seed.at(arm);
    for (std::size_t i = 0; i < rows.size(); ++i)
      per_seed[std::to_string(report.seeds[i])] = {{"precision", rows[i].precision},
                                                   {"recall", rows[i].recall},
                                                   {"f1", rows[i].f1}};
    const Prf& mean = report.mean.at(arm);
    arms[arm] = {{"per_seed", per_seed},
                 {"mean",
                  {{"precision", mean.precision}, {"recall", mean.recall}, {"f1", mean.f1}}}};
  }
  return nlohmann::json{
      {"fingerprint", report.fingerprint}, {"seeds", report.seeds}, {"arms", arms}};
}

// Per-iteration telemetry as CSV, one row per bootstrapping iteration.
inline std::string drift_curve(const std::vector<IterationRecord>& records) {
  std::string out =
      "\"iteration\",\"sample_size\",\"f1\",\"precision\",\"recall\","
      "\"pos_mean\",\"pos_std\",\"neg_mean\",\"neg_std\"\n";
  auto moment = [](std::size_t count, double value) {
    return count > 0 ? detail::format_metric(value) : std::string();
  };
  for (const auto& r : records) {
    out += std::to_string(r.iteration) + ',' + std::to_string(r.sample_size) + ',';
    if (r.has_eval)
      out += detail::format_metric(r.f1) + ',' + detail::format_metric(r.precision) + ',' +
             detail::format_metric(r.recall);
    else
      out += ",,";
    out += ',' + moment(r.moments.pos_count, r.moments.pos_mean) + ',' +
           moment(r.moments.pos_count, r.moments.pos_std) + ',' +
           moment(r.moments.neg_count, r.moments.neg_mean) + ',' +
           moment(r.moments.neg_count, r.moments.neg_std) + '\n';
  }
  return out;
}

// --- sweeps and ablations ---

struct SweepRow {
  double value = 0.0;
  Prf mean;
  std::string fingerprint;
  std::vector<std::uint64_t> seeds;
};

struct SweepTable {
  std::string parameter;
  std::vector<SweepRow> rows;
};

inline EngineConfig with_parameter(EngineConfig cfg, const std::string& parameter, double value) {
  if (parameter == "k") cfg.k = static_cast<std::int64_t>(std::llround(value));
  else if (parameter == "temperature" || parameter == "T") cfg.temperature = value;
  else if (parameter == "lambda") cfg.lambda = value;
  else if (parameter == "alpha") cfg.alpha = value;
  else throw std::invalid_argument("unknown sweep parameter: " + parameter);
  return cfg;
}

// One full multi-seed self-pretraining experiment per value, same seeds across
// rows.
inline SweepTable run_sweep(const std::string& parameter, const std::vector<double>& values,
                            const ExperimentSpec& base, const CorpusBundle& data) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  SweepTable table;
  table.parameter = parameter == "T" ? "temperature" : parameter;
  for (double value : values) {
    ExperimentSpec spec = base;
    spec.arms = {kArmSelfPretraining};
    spec.engine = with_parameter(spec.engine, parameter, value);
    const ExperimentResult result = run_experiment(spec, data);
    table.rows.push_back(
        {value, result.report.mean.at(kArmSelfPretraining), result.report.fingerprint,
         result.report.seeds});
  }
  return table;
}

inline std::string sweep_csv(const SweepTable& table) {
  std::string out = "\"parameter\",\"value\",\"precision\",\"recall\",\"f1\"\n";
  for (const auto& row : table.rows)
    out += "\"" + table.parameter + "\"," + detail::format_metric(row.value) + ',' +
           detail::format_metric(row.mean.precision) + ',' +
           detail::format_metric(row.mean.recall) + ',' + detail::format_metric(row.mean.f1) +
           '\n';
  return out;
}

struct AblationRow {
  std::string variant;
  Prf mean;
  std::string fingerprint;
};

struct AblationTable {
  std::vector<AblationRow> rows;
};

// The full method plus the four single-switch ablations.
inline AblationTable run_ablation(const ExperimentSpec& base, const CorpusBundle& data) {
  struct Variant {
    const char* name;
    void (*apply)(EngineConfig&);
  };
  static const Variant variants[] = {
      {"full", [](EngineConfig&) {}},
      {"no_two_stage", [](EngineConfig& c) { c.disable_two_stage = true; }},
      {"no_trapezoid", [](EngineConfig& c) { c.disable_trapezoid = true; }},
      {"no_distill", [](EngineConfig& c) { c.disable_distill = true; }},
      {"no_inertia", [](EngineConfig& c) { c.disable_inertia = true; }},
  };
  AblationTable table;
  for (const auto& variant : variants) {
    ExperimentSpec spec = base;
    spec.arms = {kArmSelfPretraining};
    variant.apply(spec.engine);
    const ExperimentResult result = run_experiment(spec, data);
    table.rows.push_back(
        {variant.name, result.report.mean.at(kArmSelfPretraining), result.report.fingerprint});
  }
  return table;
}

inline std::string ablation_csv(const AblationTable& table) {
  std::string out = "\"variant\",\"precision\",\"recall\",\"f1\"\n";
  for (const auto& row : table.rows)
    out += "\"" + row.variant + "\"," + detail::format_metric(row.mean.precision) + ',' +
           detail::format_metric(row.mean.recall) + ',' + detail::format_metric(row.mean.f1) +
           '\n';
  return out;
}

}  // namespace spt
