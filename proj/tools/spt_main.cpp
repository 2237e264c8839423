// spt: semi-supervised text classification via bootstrapped self-pretraining.
// Subcommands: synth (build a synthetic corpus triplet), run (train/evaluate
// arms), sweep (hyper-parameter sweep), ablate (single-switch ablations).

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spt/harness.hpp"
#include "spt/sampling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string default_out_dir() {
  if (const char* env = std::getenv("SPT_OUT_DIR")) return env;
  return ".";
}

spt::CorpusFormat format_for(const fs::path& path, const std::string& forced) {
  if (forced == "csv") return spt::CorpusFormat::Csv;
  if (forced == "jsonl") return spt::CorpusFormat::Jsonl;
  return path.extension() == ".csv" ? spt::CorpusFormat::Csv : spt::CorpusFormat::Jsonl;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    seeds.push_back(std::stoull(token));
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "needs at least one seed");
  return seeds;
}

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> values;
  std::string token;
  std::istringstream in(csv);
  while (std::getline(in, token, ',')) {
    if (token.empty()) continue;
    values.push_back(std::stod(token));
  }
  return values;
}

std::string canonical_arm(const std::string& name) {
  if (name == "supervised") return spt::kArmSupervised;
  if (name == "selftrain" || name == "self_training") return spt::kArmSelfTraining;
  if (name == "selfpretrain" || name == "self_pretraining") return spt::kArmSelfPretraining;
  throw CLI::ValidationError("--arm", "unknown arm '" + name + "'");
}

// All tunables of `run`/`sweep`/`ablate`, overridable from a JSON config file
// (flags win over the file, the file wins over built-in defaults).
struct RunOptions {
  std::string train_path;
  std::string unlabeled_path;
  std::string test_path;
  std::string format;  // "", "csv", "jsonl"
  std::vector<std::string> arms{"supervised", "selfpretrain"};
  std::uint64_t labeled = 100;
  std::string seeds = "1,2,3";
  spt::EngineConfig engine;
  double theta = 0.9;
  double growth_cap = 0.10;
  int max_iters = 0;  // 0 = unlimited
  int jobs = 1;
  bool save_models = false;
  std::string out_dir = default_out_dir();
  std::string config_path;  // consumed by the pre-scan; bound only for --help
};

void apply_config_file(RunOptions& opt, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config file " + path.string() + ": " + e.what());
  }
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("train", opt.train_path);
  get("unlabeled", opt.unlabeled_path);
  get("test", opt.test_path);
  get("format", opt.format);
  if (j.contains("arms")) opt.arms = j.at("arms").get<std::vector<std::string>>();
  get("labeled", opt.labeled);
  if (j.contains("seeds")) {
    if (j.at("seeds").is_array()) {
      std::string csv;
      for (const auto& s : j.at("seeds")) csv += (csv.empty() ? "" : ",") + s.dump();
      opt.seeds = csv;
    } else {
      opt.seeds = j.at("seeds").get<std::string>();
    }
  }
  get("k", opt.engine.k);
  get("temperature", opt.engine.temperature);
  get("lambda", opt.engine.lambda);
  get("alpha", opt.engine.alpha);
  get("pretrain_epochs", opt.engine.pretrain_epochs);
  get("finetune_epochs", opt.engine.finetune_epochs);
  get("batch", opt.engine.batch_size);
  get("lr", opt.engine.learning_rate);
  get("dim", opt.engine.dim);
  get("hidden", opt.engine.hidden);
  get("init_seed", opt.engine.init_seed);
  get("sample_seed", opt.engine.sample_seed);
  get("disable_two_stage", opt.engine.disable_two_stage);
  get("disable_trapezoid", opt.engine.disable_trapezoid);
  get("disable_distill", opt.engine.disable_distill);
  get("disable_inertia", opt.engine.disable_inertia);
  get("theta", opt.theta);
  get("growth_cap", opt.growth_cap);
  get("max_iters", opt.max_iters);
  get("jobs", opt.jobs);
  get("save_models", opt.save_models);
  get("out", opt.out_dir);
}

void add_run_flags(CLI::App* cmd, RunOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file; explicit flags override it")
      ->check(CLI::ExistingFile);
  cmd->add_option("--train", opt.train_path, "labeled corpus (CSV or JSONL)");
  cmd->add_option("--unlabeled", opt.unlabeled_path, "unlabeled corpus");
  cmd->add_option("--test", opt.test_path, "test corpus");
  cmd->add_option("--format", opt.format, "force corpus format: csv|jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  cmd->add_option("--arm", opt.arms,
                  "arm to run (repeatable): supervised|selftrain|selfpretrain");
  cmd->add_option("--labeled", opt.labeled, "labeled budget drawn from the training pool");
  cmd->add_option("--seeds", opt.seeds, "comma-separated experiment seeds");
  cmd->add_option("--k", opt.engine.k, "sample growth per iteration");
  cmd->add_option("--temperature", opt.engine.temperature, "distillation temperature T");
  cmd->add_option("--lambda", opt.engine.lambda, "distillation weight in the finetune loss");
  cmd->add_option("--alpha", opt.engine.alpha, "pseudo-label inertia");
  cmd->add_option("--pretrain-epochs", opt.engine.pretrain_epochs);
  cmd->add_option("--finetune-epochs", opt.engine.finetune_epochs);
  cmd->add_option("--batch", opt.engine.batch_size, "mini-batch size");
  cmd->add_option("--lr", opt.engine.learning_rate, "initial learning rate R");
  cmd->add_option("--dim", opt.engine.dim, "hashed feature space size");
  cmd->add_option("--hidden", opt.engine.hidden, "hidden layer width");
  cmd->add_option("--init-seed", opt.engine.init_seed);
  cmd->add_option("--sample-seed", opt.engine.sample_seed);
  cmd->add_flag("--disable-two-stage", opt.engine.disable_two_stage);
  cmd->add_flag("--disable-trapezoid", opt.engine.disable_trapezoid);
  cmd->add_flag("--disable-distill", opt.engine.disable_distill);
  cmd->add_flag("--disable-inertia", opt.engine.disable_inertia);
  cmd->add_option("--theta", opt.theta, "self-training confidence threshold");
  cmd->add_option("--growth-cap", opt.growth_cap, "self-training per-iteration growth cap");
  cmd->add_option("--max-iters", opt.max_iters, "self-training iteration cap (0 = unlimited)");
  cmd->add_option("--jobs", opt.jobs, "parallel (arm, seed) work units");
  cmd->add_flag("--save-models", opt.save_models, "write model checkpoints");
  cmd->add_option("--out", opt.out_dir, "output directory (default $SPT_OUT_DIR or .)");
}

spt::ExperimentSpec build_spec(const RunOptions& opt) {
  spt::ExperimentSpec spec;
  spec.labeled_budget = opt.labeled;
  spec.seeds = parse_seed_list(opt.seeds);
  spec.arms.clear();
  for (const auto& arm : opt.arms) {
    const std::string canonical = canonical_arm(arm);
    if (std::find(spec.arms.begin(), spec.arms.end(), canonical) == spec.arms.end())
      spec.arms.push_back(canonical);
  }
  spec.engine = opt.engine;
  spec.theta = opt.theta;
  spec.growth_cap = opt.growth_cap;
  if (opt.max_iters > 0) spec.max_iters = opt.max_iters;
  spec.jobs = opt.jobs;
  spec.keep_models = opt.save_models;
  return spec;
}

bool needs_unlabeled(const spt::ExperimentSpec& spec) {
  for (const auto& arm : spec.arms)
    if (arm != spt::kArmSupervised) return true;
  return false;
}

spt::CorpusBundle load_bundle(const RunOptions& opt, const spt::ExperimentSpec& spec) {
  if (opt.train_path.empty()) throw std::runtime_error("missing --train corpus");
  if (opt.test_path.empty()) throw std::runtime_error("missing --test corpus");
  spt::CorpusBundle data;
  data.pool = spt::load_corpus(opt.train_path, format_for(opt.train_path, opt.format),
                               spt::CorpusKind::Labeled);
  if (needs_unlabeled(spec)) {
    if (opt.unlabeled_path.empty() || !fs::exists(opt.unlabeled_path))
      throw std::runtime_error("unlabeled corpus not found: " +
                               (opt.unlabeled_path.empty() ? std::string("(not given)")
                                                           : opt.unlabeled_path));
    data.unlabeled = spt::load_corpus(opt.unlabeled_path,
                                      format_for(opt.unlabeled_path, opt.format),
                                      spt::CorpusKind::Unlabeled);
  } else {
    data.unlabeled.kind = spt::CorpusKind::Unlabeled;
  }
  data.test = spt::load_corpus(opt.test_path, format_for(opt.test_path, opt.format),
                               spt::CorpusKind::Test);
  return data;
}

json inputs_manifest(const RunOptions& opt, const spt::ExperimentSpec& spec) {
  json inputs = json::object();
  auto add = [&](const char* name, const std::string& path) {
    if (!path.empty())
      inputs[name] = {{"path", path}, {"fnv1a64", spt::file_digest(path)}};
  };
  add("train", opt.train_path);
  if (needs_unlabeled(spec)) add("unlabeled", opt.unlabeled_path);
  add("test", opt.test_path);
  return inputs;
}

json base_manifest(const std::string& command, const spt::ExperimentSpec& spec,
                   const RunOptions& opt) {
  return json{{"tool", spt::kToolName},
              {"version", spt::kToolVersion},
              {"command", command},
              {"config", spt::to_json(spec)},
              {"fingerprint", spt::fingerprint(spec)},
              {"jobs", spec.jobs},
              {"inputs", inputs_manifest(opt, spec)},
              {"seeds", spec.seeds}};
}

void write_drift_files(const spt::ExperimentResult& result, const fs::path& out_dir,
                       std::vector<std::string>& outputs) {
  for (const auto& run : result.runs) {
    if (run.records.empty()) continue;
    const std::string name =
        "drift_" + run.arm + "_seed" + std::to_string(run.seed) + ".csv";
    spt::write_text_file(spt::drift_curve(run.records), out_dir / name);
    outputs.push_back(name);
  }
}

void write_model_files(const spt::ExperimentResult& result, const fs::path& out_dir,
                       std::vector<std::string>& outputs) {
  for (const auto& run : result.runs) {
    for (const auto& [tag, model] : run.models) {
      const std::string name =
          "model_" + run.arm + "_seed" + std::to_string(run.seed) + "_" + tag + ".json";
      spt::save_classifier(model, out_dir / name);
      outputs.push_back(name);
    }
  }
}

int cmd_run(const RunOptions& opt) {
  const spt::ExperimentSpec spec = build_spec(opt);
  const spt::CorpusBundle data = load_bundle(opt, spec);
  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  json manifest = base_manifest("run", spec, opt);
  manifest["outputs"] = {"report.csv", "report.json"};
  spt::write_json_file(manifest, out_dir / "manifest.json");

  const spt::ExperimentResult result = spt::run_experiment(spec, data);
  spt::write_text_file(spt::report_csv(result.report), out_dir / "report.csv");
  spt::write_json_file(spt::report_json(result.report), out_dir / "report.json");
  std::vector<std::string> extra;
  write_drift_files(result, out_dir, extra);
  if (opt.save_models) write_model_files(result, out_dir, extra);

  for (const auto& arm : result.report.arms) {
    const auto& mean = result.report.mean.at(arm);
    std::printf("%-18s mean F1 %.4f  precision %.4f  recall %.4f\n", arm.c_str(), mean.f1,
                mean.precision, mean.recall);
  }
  return 0;
}

int cmd_sweep(const RunOptions& opt, const std::string& parameter, const std::string& values_csv) {
  const std::vector<double> values = parse_value_list(values_csv);
  if (values.empty()) throw CLI::ValidationError("--values", "needs at least one value");
  if (parameter != "k" && parameter != "temperature" && parameter != "T" &&
      parameter != "lambda" && parameter != "alpha")
    throw CLI::ValidationError("--param", "unknown parameter '" + parameter + "'");

  RunOptions effective = opt;
  effective.arms = {"selfpretrain"};
  const spt::ExperimentSpec spec = build_spec(effective);
  const spt::CorpusBundle data = load_bundle(effective, spec);
  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  json manifest = base_manifest("sweep", spec, effective);
  manifest["sweep"] = {{"parameter", parameter}, {"values", values}};
  manifest["outputs"] = {"sweep.csv"};
  spt::write_json_file(manifest, out_dir / "manifest.json");

  const spt::SweepTable table = spt::run_sweep(parameter, values, spec, data);
  spt::write_text_file(spt::sweep_csv(table), out_dir / "sweep.csv");
  for (const auto& row : table.rows)
    std::printf("%s=%-8g mean F1 %.4f\n", table.parameter.c_str(), row.value, row.mean.f1);
  return 0;
}

int cmd_ablate(const RunOptions& opt) {
  RunOptions effective = opt;
  effective.arms = {"selfpretrain"};
  const spt::ExperimentSpec spec = build_spec(effective);
  const spt::CorpusBundle data = load_bundle(effective, spec);
  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  json manifest = base_manifest("ablate", spec, effective);
  manifest["outputs"] = {"ablation.csv"};
  spt::write_json_file(manifest, out_dir / "manifest.json");

  const spt::AblationTable table = spt::run_ablation(spec, data);
  spt::write_text_file(spt::ablation_csv(table), out_dir / "ablation.csv");
  for (const auto& row : table.rows)
    std::printf("%-14s mean F1 %.4f\n", row.variant.c_str(), row.mean.f1);
  return 0;
}

struct SynthOptions {
  std::size_t vocab = 1000;
  std::size_t pos = 500;
  std::size_t neg = 500;
  double overlap = 0.4;
  std::size_t doc_len = 12;
  std::size_t unlabeled = 5000;
  std::size_t test_pos = 500;
  std::size_t test_neg = 500;
  std::uint64_t seed = 7;
  std::string out_dir = default_out_dir();
};

int cmd_synth(const SynthOptions& opt) {
  const fs::path out_dir(opt.out_dir);
  fs::create_directories(out_dir);

  const spt::Corpus labeled =
      spt::gen_synthetic(opt.vocab, opt.pos, opt.neg, opt.overlap, opt.doc_len,
                         spt::mix_seed(opt.seed, 1));
  spt::Corpus unlabeled = spt::strip_labels(
      spt::gen_synthetic(opt.vocab, opt.unlabeled / 2, opt.unlabeled - opt.unlabeled / 2,
                         opt.overlap, opt.doc_len, spt::mix_seed(opt.seed, 2)));
  spt::Corpus test = spt::gen_synthetic(opt.vocab, opt.test_pos, opt.test_neg, opt.overlap,
                                        opt.doc_len, spt::mix_seed(opt.seed, 3));
  test.kind = spt::CorpusKind::Test;

  const json manifest{{"tool", spt::kToolName},
                      {"version", spt::kToolVersion},
                      {"command", "synth"},
                      {"config",
                       {{"vocab", opt.vocab},
                        {"pos", opt.pos},
                        {"neg", opt.neg},
                        {"overlap", opt.overlap},
                        {"doc_len", opt.doc_len},
                        {"unlabeled", opt.unlabeled},
                        {"test_pos", opt.test_pos},
                        {"test_neg", opt.test_neg},
                        {"seed", opt.seed}}},
                      {"outputs", {"labeled.jsonl", "unlabeled.jsonl", "test.jsonl"}}};
  spt::write_json_file(manifest, out_dir / "manifest.json");
  spt::write_corpus_jsonl(labeled, out_dir / "labeled.jsonl");
  spt::write_corpus_jsonl(unlabeled, out_dir / "unlabeled.jsonl");
  spt::write_corpus_jsonl(test, out_dir / "test.jsonl");
  std::printf("wrote %zu labeled / %zu unlabeled / %zu test documents to %s\n", labeled.size(),
              unlabeled.size(), test.size(), out_dir.string().c_str());
  return 0;
}

// Pre-scan argv for --config so the file's values become defaults that
// explicit flags then override.
std::optional<std::string> find_config_arg(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-supervised text classification via bootstrapped self-pretraining"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(spt::kToolVersion));

  SynthOptions synth_opt;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus triplet");
  synth->add_option("--vocab", synth_opt.vocab)->check(CLI::Range(std::size_t{4}, std::size_t{1} << 30));
  synth->add_option("--pos", synth_opt.pos, "positive documents in the labeled pool");
  synth->add_option("--neg", synth_opt.neg, "negative documents in the labeled pool");
  synth->add_option("--overlap", synth_opt.overlap, "shared vocabulary fraction")
      ->check(CLI::Range(0.0, 1.0));
  synth->add_option("--doc-len", synth_opt.doc_len)->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  synth->add_option("--unlabeled", synth_opt.unlabeled, "unlabeled pool size");
  synth->add_option("--test-pos", synth_opt.test_pos);
  synth->add_option("--test-neg", synth_opt.test_neg);
  synth->add_option("--seed", synth_opt.seed);
  synth->add_option("--out", synth_opt.out_dir, "output directory (default $SPT_OUT_DIR or .)");

  RunOptions run_opt;
  if (auto config = find_config_arg(argc, argv)) {
    try {
      apply_config_file(run_opt, *config);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  auto* run = app.add_subcommand("run", "run experiment arms and write reports");
  add_run_flags(run, run_opt);

  RunOptions sweep_opt = run_opt;
  std::string sweep_param;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "sweep one hyper-parameter");
  add_run_flags(sweep, sweep_opt);
  sweep->add_option("--param", sweep_param, "one of k, temperature, lambda, alpha")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();

  RunOptions ablate_opt = run_opt;
  auto* ablate = app.add_subcommand("ablate", "run the single-switch ablation grid");
  add_run_flags(ablate, ablate_opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(synth_opt);
    if (run->parsed()) return cmd_run(run_opt);
    if (sweep->parsed()) return cmd_sweep(sweep_opt, sweep_param, sweep_values);
    if (ablate->parsed()) return cmd_ablate(ablate_opt);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
