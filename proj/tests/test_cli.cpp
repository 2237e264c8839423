#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = SPT_CLI_PATH;

int run_command(const std::string& args) {
  const std::string command = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// small corpus triplet shared by the run/sweep/ablate tests
const std::string kSynthFlags = "--vocab 80 --pos 60 --neg 60 --overlap 0.3 --doc-len 6 "
                                "--unlabeled 120 --test-pos 40 --test-neg 40 --seed 7";
const std::string kRunFlags = "--labeled 40 --seeds 1,2 --k 60 --dim 256 --hidden 8 --batch 16";

std::string corpus_flags(const fs::path& dir) {
  return "--train " + (dir / "labeled.jsonl").string() + " --unlabeled " +
         (dir / "unlabeled.jsonl").string() + " --test " + (dir / "test.jsonl").string();
}

}  // namespace

TEST_CASE("synth writes a deterministic corpus triplet") {
  const auto dir1 = fresh_dir("spt_cli_synth1");
  const auto dir2 = fresh_dir("spt_cli_synth2");
  REQUIRE(run_command("synth " + kSynthFlags + " --out " + dir1.string()) == 0);
  REQUIRE(run_command("synth " + kSynthFlags + " --out " + dir2.string()) == 0);
  for (const char* name : {"labeled.jsonl", "unlabeled.jsonl", "test.jsonl", "manifest.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(dir1 / name));
    CHECK(slurp(dir1 / name) == slurp(dir2 / name));
  }
  // unlabeled corpus carries no label fields
  CHECK(slurp(dir1 / "unlabeled.jsonl").find("label") == std::string::npos);
}

TEST_CASE("synth rejects an out-of-range overlap") {
  const auto dir = fresh_dir("spt_cli_synth_bad");
  CHECK(run_command("synth --overlap 1.5 --out " + dir.string()) != 0);
}

TEST_CASE("run produces reports, drift curves, and a manifest") {
  const auto corpus = fresh_dir("spt_cli_corpus");
  REQUIRE(run_command("synth " + kSynthFlags + " --out " + corpus.string()) == 0);

  const auto out1 = fresh_dir("spt_cli_run1");
  const std::string flags = "run " + corpus_flags(corpus) +
                            " --arm supervised --arm selfpretrain " + kRunFlags;
  REQUIRE(run_command(flags + " --out " + out1.string()) == 0);
  for (const char* name : {"report.csv", "report.json", "manifest.json",
                           "drift_self_pretraining_seed1.csv",
                           "drift_self_pretraining_seed2.csv"}) {
    CAPTURE(name);
    CHECK(fs::exists(out1 / name));
  }

  // identical invocation, byte-identical artifacts
  const auto out2 = fresh_dir("spt_cli_run2");
  REQUIRE(run_command(flags + " --out " + out2.string()) == 0);
  CHECK(slurp(out1 / "report.csv") == slurp(out2 / "report.csv"));
  CHECK(slurp(out1 / "report.json") == slurp(out2 / "report.json"));
  CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));

  const auto report = nlohmann::json::parse(slurp(out1 / "report.json"));
  CHECK(report.contains("fingerprint"));
  CHECK(report["arms"].contains("supervised"));
  CHECK(report["arms"].contains("self_pretraining"));

  const auto models_out = fresh_dir("spt_cli_models");
  REQUIRE(run_command("run " + corpus_flags(corpus) +
                      " --arm selfpretrain --labeled 40 --seeds 1 --k 60 --dim 256 --hidden 8"
                      " --batch 16 --save-models --out " +
                      models_out.string()) == 0);
  CHECK(fs::exists(models_out / "model_self_pretraining_seed1_m1.json"));
  CHECK(fs::exists(models_out / "model_self_pretraining_seed1_m2.json"));
}

TEST_CASE("run from a config file equals the equivalent flags") {
  const auto corpus = fresh_dir("spt_cli_corpus_cfg");
  REQUIRE(run_command("synth " + kSynthFlags + " --out " + corpus.string()) == 0);

  const auto flag_out = fresh_dir("spt_cli_flags");
  REQUIRE(run_command("run " + corpus_flags(corpus) + " --arm supervised --arm selfpretrain " +
                      kRunFlags + " --out " + flag_out.string()) == 0);

  const nlohmann::json config{{"train", (corpus / "labeled.jsonl").string()},
                              {"unlabeled", (corpus / "unlabeled.jsonl").string()},
                              {"test", (corpus / "test.jsonl").string()},
                              {"arms", {"supervised", "selfpretrain"}},
                              {"labeled", 40},
                              {"seeds", "1,2"},
                              {"k", 60},
                              {"dim", 256},
                              {"hidden", 8},
                              {"batch", 16}};
  const auto config_path = fs::temp_directory_path() / "spt_cli_exp.json";
  std::ofstream(config_path) << config.dump(2);

  const auto config_out = fresh_dir("spt_cli_config");
  REQUIRE(run_command("run --config " + config_path.string() + " --out " +
                      config_out.string()) == 0);
  CHECK(slurp(flag_out / "report.csv") == slurp(config_out / "report.csv"));
  CHECK(slurp(flag_out / "report.json") == slurp(config_out / "report.json"));
}

TEST_CASE("run fails loudly when the unlabeled corpus is missing") {
  const auto corpus = fresh_dir("spt_cli_corpus_missing");
  REQUIRE(run_command("synth " + kSynthFlags + " --out " + corpus.string()) == 0);
  const auto out = fresh_dir("spt_cli_missing_out");
  const std::string missing = (corpus / "no_such_file.jsonl").string();
  const std::string command = kCli + " run --train " + (corpus / "labeled.jsonl").string() +
                              " --unlabeled " + missing + " --test " +
                              (corpus / "test.jsonl").string() +
                              " --arm selfpretrain " + kRunFlags + " --out " + out.string() +
                              " 2> " + (out / "stderr.txt").string();
  const int status = std::system(command.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) != 0);
  CHECK(slurp(out / "stderr.txt").find(missing) != std::string::npos);

  // supervised-only runs do not need the unlabeled corpus at all
  CHECK(run_command("run --train " + (corpus / "labeled.jsonl").string() + " --test " +
                    (corpus / "test.jsonl").string() + " --arm supervised " + kRunFlags +
                    " --out " + out.string()) == 0);
}

TEST_CASE("sweep and ablate emit their tables") {
  const auto corpus = fresh_dir("spt_cli_corpus_sweep");
  REQUIRE(run_command("synth " + kSynthFlags + " --out " + corpus.string()) == 0);

  const std::string table_flags = "--labeled 40 --seeds 1 --k 60 --dim 256 --hidden 8 --batch 16";
  const auto sweep_out = fresh_dir("spt_cli_sweep");
  REQUIRE(run_command("sweep " + corpus_flags(corpus) + " " + table_flags +
                      " --param lambda --values 0.1,0.3,0.5 --out " + sweep_out.string()) == 0);
  const std::string sweep = slurp(sweep_out / "sweep.csv");
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 4);  // header + 3 rows

  CHECK(run_command("sweep " + corpus_flags(corpus) + " --param nonsense --values 1 --out " +
                    sweep_out.string()) != 0);

  const auto ablate_out = fresh_dir("spt_cli_ablate");
  REQUIRE(run_command("ablate " + corpus_flags(corpus) + " " + table_flags + " --out " +
                      ablate_out.string()) == 0);
  const std::string ablation = slurp(ablate_out / "ablation.csv");
  CHECK(std::count(ablation.begin(), ablation.end(), '\n') == 6);  // header + 5 rows
}
