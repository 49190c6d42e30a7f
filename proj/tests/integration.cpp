// CLI-level integration checks: subcommand behavior, exit codes, config
// precedence, and the train/predict/evaluate file formats. Runs the real
// binary; pass its path with --cli and the fixture directory with
// --fixtures.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "multispan/eval.hpp"
#include "multispan/heads.hpp"

using namespace multispan;
namespace fs = std::filesystem;

namespace {

std::string g_cli;
fs::path g_dir;
int g_failures = 0;

void check(bool ok, const std::string& what) {
  std::cout << (ok ? "ok" : "FAIL") << ": " << what << "\n";
  if (!ok) ++g_failures;
}

int run(const std::string& args, std::string* output = nullptr) {
  const fs::path out_file = g_dir / "cmd_output.txt";
  const std::string cmd =
      "\"" + g_cli + "\" " + args + " > \"" + out_file.string() + "\" 2>&1";
  int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    *output = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  std::string fixtures;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--cli") g_cli = argv[i + 1];
    if (std::string(argv[i]) == "--fixtures") fixtures = argv[i + 1];
  }
  if (g_cli.empty() || fixtures.empty()) {
    std::cerr << "usage: integration --cli <mspan> --fixtures <dir>\n";
    return 2;
  }
  g_dir = fs::temp_directory_path() /
          ("mspan_integration_" + std::to_string(static_cast<unsigned>(::getpid())));
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);
  const std::string drop = fixtures + "/mini_drop.json";
  const std::string quoref = fixtures + "/mini_quoref.json";

  // enumerate prints the three possibly-correct taggings of the fixture
  {
    std::string out;
    int code = run("enumerate --data \"" + drop + "\" --format drop --id toy_q1 --scheme bio", &out);
    check(code == 0, "enumerate exits 0");
    check(out.find("count: 3") != std::string::npos, "enumerate reports 3 taggings");
    check(out.find("fell_back: false") != std::string::npos,
          "enumerate reports no fallback");
  }

  // exit codes: unknown flag 2, missing file 1
  {
    check(run("train --nonsense") == 2, "unknown flag exits 2");
    check(run("train --data /does/not/exist.json --model \"" +
              (g_dir / "m.json").string() + "\"") == 1,
          "missing data file exits 1");
    check(run("--help") == 0, "--help exits 0");
  }

  // train with lr 0 leaves the seeded initialization untouched
  {
    const fs::path model = g_dir / "zero_lr.json";
    int code = run("train --data \"" + drop +
                   "\" --format drop --scheme io --lr 0 --epochs 4 --seed 21 "
                   "--dim 16 --model \"" + model.string() + "\" --out \"" +
                   (g_dir / "trace.csv").string() + "\"");
    check(code == 0, "train --lr 0 exits 0");
    Model trained = load_model(model.string());
    Model fresh = init_model(trained.config, 21);
    check(*trained.tase == *fresh.tase && trained.selector == fresh.selector,
          "train --lr 0 keeps parameters at their initialization");

    std::string trace = slurp(g_dir / "trace.csv");
    check(trace.rfind("epoch,mean_loss,mean_tag_nll,mean_span_nll,mean_selector_nll\n", 0) == 0,
          "loss trace has the CSV header");
    check(std::count(trace.begin(), trace.end(), '\n') == 5, "loss trace has one row per epoch");

    // predict from the untouched initialization, twice: identical bytes
    const fs::path p1 = g_dir / "p1.json", p2 = g_dir / "p2.json";
    check(run("predict --data \"" + drop + "\" --format drop --model \"" +
              model.string() + "\" --out \"" + p1.string() + "\"") == 0,
          "predict exits 0");
    run("predict --data \"" + drop + "\" --format drop --model \"" +
        model.string() + "\" --out \"" + p2.string() + "\"");
    check(slurp(p1) == slurp(p2), "prediction files are byte-identical");
  }

  // evaluate with predictions equal to gold reports EM 1.0
  {
    Predictions gold_preds = {{"h1_q1", {"Filipinos", "Pakistanis"}},
                              {"toy_q1", {"X", "Z"}}};
    const fs::path preds = g_dir / "gold_preds.json";
    save_predictions(preds.string(), gold_preds);
    const fs::path report = g_dir / "report.json";
    std::string out;
    int code = run("evaluate --data \"" + drop + "\" --format drop --pred \"" +
                   preds.string() + "\" --out \"" + report.string() + "\"", &out);
    check(code == 0, "evaluate exits 0");
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    check(j.at("em").get<double>() == 1.0, "evaluate reports EM 1.0 on gold");
    check(j.at("f1").get<double>() == 1.0, "evaluate reports F1 1.0 on gold");
    check(out.find("EM=1.0000") != std::string::npos, "pretty report prints EM");
  }

  // quoref format loads and trains end to end
  {
    const fs::path model = g_dir / "quoref.json";
    int code = run("train --data \"" + quoref +
                   "\" --format quoref --scheme bio --epochs 30 --seed 5 "
                   "--dim 16 --model \"" + model.string() + "\"");
    check(code == 0, "train on the quoref fixture exits 0");
    const fs::path preds = g_dir / "quoref_preds.json";
    code = run("predict --data \"" + quoref + "\" --format quoref --model \"" +
               model.string() + "\" --out \"" + preds.string() + "\"");
    check(code == 0, "predict on the quoref fixture exits 0");
    Predictions p = load_predictions(preds.string());
    check(p.count("quoref_q1") == 1, "prediction carries the quoref query id");
  }

  // config file supplies defaults, flags win
  {
    const fs::path cfg = g_dir / "mspan.cfg";
    std::ofstream(cfg) << "n=6\nseed=3\n";
    const fs::path out1 = g_dir / "synth1.json";
    run("synth --config \"" + cfg.string() + "\" --out \"" + out1.string() + "\"");
    nlohmann::json j1 = nlohmann::json::parse(slurp(out1));
    check(j1.size() == 6, "config file sets the synth size");
    const fs::path out2 = g_dir / "synth2.json";
    run("synth --config \"" + cfg.string() + "\" --n 4 --out \"" + out2.string() + "\"");
    nlohmann::json j2 = nlohmann::json::parse(slurp(out2));
    check(j2.size() == 4, "a flag overrides the config file");
  }

  fs::remove_all(g_dir);
  if (g_failures > 0) {
    std::cout << g_failures << " integration check(s) failed\n";
    return 1;
  }
  std::cout << "all integration checks passed\n";
  return 0;
}
