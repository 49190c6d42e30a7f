#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "multispan/dataset.hpp"
#include "multispan/decode.hpp"
#include "multispan/eval.hpp"
#include "multispan/heads.hpp"
#include "multispan/objective.hpp"
#include "multispan/synth.hpp"
#include "multispan/tagging.hpp"

namespace {

using namespace multispan;

struct Options {
  std::string data;
  std::string format = "drop";
  std::string scheme = "io";
  std::string heads = "tase";
  std::size_t cap = 1000;
  std::size_t max_length = 512;
  double lr = 1e-2;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  std::size_t dim = 32;
  std::string model;
  std::string out;
  std::string pred;
  std::string id;
  std::size_t n = 100;
};

std::vector<Example> load_and_truncate(const Options& opt, bool filter,
                                       std::size_t* discarded = nullptr) {
  LoadResult loaded = load_dataset(opt.data, format_from_name(opt.format));
  if (loaded.skipped_non_span > 0) {
    std::cerr << "skipped " << loaded.skipped_non_span
              << " non-span example(s) at load\n";
  }
  if (filter) {
    TruncateResult cut = truncate_and_filter(loaded.examples, opt.max_length);
    if (discarded) *discarded = cut.discarded.size();
    if (!cut.discarded.empty()) {
      std::cerr << "discarded " << cut.discarded.size()
                << " example(s): unanswerable after truncation\n";
    }
    return cut.kept;
  }
  // test time: truncate but keep unanswerable examples; they are still
  // predicted and scored
  std::vector<Example> all;
  all.reserve(loaded.examples.size());
  for (const Example& ex : loaded.examples) {
    all.push_back(truncate_example(ex, opt.max_length));
  }
  if (discarded) *discarded = 0;
  return all;
}

int cmd_train(const Options& opt) {
  std::vector<Example> examples = load_and_truncate(opt, /*filter=*/true);
  TrainConfig config;
  config.learning_rate = opt.lr;
  config.epochs = opt.epochs;
  config.seed = opt.seed;
  config.cap = opt.cap;
  config.scheme = scheme_from_name(opt.scheme);
  config.use_tase = opt.heads == "tase" || opt.heads == "tase+sse";
  config.use_sse = opt.heads == "sse" || opt.heads == "tase+sse";
  if (!config.use_tase && !config.use_sse) {
    throw std::runtime_error("unknown --heads value: " + opt.heads);
  }
  config.feature_dim = opt.dim;

  TrainResult result = train(examples, config);
  save_model(opt.model, result.model);
  std::cout << "trained on " << examples.size() << " example(s), "
            << config.epochs << " epoch(s)\n";
  if (!result.trace.empty()) {
    std::printf("final mean loss: %.6f\n", result.trace.back().mean_loss);
  }
  if (!opt.out.empty()) write_loss_trace(opt.out, result.trace);
  return 0;
}

int cmd_predict(const Options& opt) {
  Model model = load_model(opt.model);
  std::vector<Example> examples = load_and_truncate(opt, /*filter=*/false);
  Predictions preds;
  for (const Example& ex : examples) {
    preds[ex.id] = prediction_strings(predict_answer(ex, model));
  }
  save_predictions(opt.out, preds);
  std::cout << "wrote " << preds.size() << " prediction(s) to " << opt.out << "\n";
  return 0;
}

int cmd_evaluate(const Options& opt) {
  std::vector<Example> examples = load_and_truncate(opt, /*filter=*/false);
  Predictions preds = load_predictions(opt.pred);
  MetricReport report = evaluate(examples, preds);
  std::cout << report_to_text(report);
  if (!opt.out.empty()) {
    std::ofstream out(opt.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report: " + opt.out);
    out << report_to_json(report);
  }
  return 0;
}

int cmd_enumerate(const Options& opt) {
  std::vector<Example> examples = load_and_truncate(opt, /*filter=*/true);
  for (const Example& ex : examples) {
    if (ex.id != opt.id) continue;
    EnumerationResult result = enumerate_correct_taggings(
        gold_occurrences(ex), ex.length(), scheme_from_name(opt.scheme), opt.cap);
    std::cout << "id: " << ex.id << "\n"
              << "count: " << result.taggings.size() << "\n"
              << "fell_back: " << (result.fell_back ? "true" : "false") << "\n";
    for (const Tagging& t : result.taggings) {
      std::cout << to_debug_string(t) << "\n";
    }
    return 0;
  }
  throw std::runtime_error("no example with id '" + opt.id + "' in " + opt.data);
}

int cmd_synth(const Options& opt) {
  synth_generate(opt.out, opt.n, opt.seed);
  std::cout << "wrote " << opt.n << " synthetic example(s) to " << opt.out << "\n";
  return 0;
}

}  // namespace

// Options live on the main app with fallthrough so a plain key=value
// config file applies to every subcommand; flags beat config entries
// beat defaults.
int main(int argc, char** argv) {
  CLI::App app{"tag-based multi-span answer extraction"};
  app.require_subcommand(1);
  app.fallthrough(true);
  app.set_config("--config", "", "plain key=value config file");

  Options opt;
  app.add_option("--data", opt.data, "dataset file");
  app.add_option("--format", opt.format, "drop|quoref|synth");
  app.add_option("--scheme", opt.scheme, "bio|io");
  app.add_option("--heads", opt.heads, "tase|sse|tase+sse");
  app.add_option("--cap", opt.cap, "tagging enumeration cap");
  app.add_option("--max-length", opt.max_length, "truncation length");
  app.add_option("--lr", opt.lr, "learning rate");
  app.add_option("--epochs", opt.epochs, "epoch count");
  app.add_option("--seed", opt.seed, "rng seed");
  app.add_option("--dim", opt.dim, "feature dimension");
  app.add_option("--model", opt.model, "model file path");
  app.add_option("--out", opt.out, "output path");
  app.add_option("--pred", opt.pred, "predictions JSON path");
  app.add_option("--id", opt.id, "example id for enumerate");
  app.add_option("--n", opt.n, "synthetic example count");

  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  CLI::App* predict_cmd = app.add_subcommand("predict", "write predictions");
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "score predictions");
  CLI::App* enum_cmd =
      app.add_subcommand("enumerate", "show possibly-correct taggings");
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
  }

  auto require = [&](const std::string& value, const char* flag) {
    if (value.empty()) {
      std::cerr << "error: " << flag << " is required for this subcommand\n";
      std::exit(2);
    }
  };

  try {
    if (train_cmd->parsed()) {
      require(opt.data, "--data");
      require(opt.model, "--model");
      return cmd_train(opt);
    }
    if (predict_cmd->parsed()) {
      require(opt.data, "--data");
      require(opt.model, "--model");
      require(opt.out, "--out");
      return cmd_predict(opt);
    }
    if (eval_cmd->parsed()) {
      require(opt.data, "--data");
      require(opt.pred, "--pred");
      return cmd_evaluate(opt);
    }
    if (enum_cmd->parsed()) {
      require(opt.data, "--data");
      require(opt.id, "--id");
      return cmd_enumerate(opt);
    }
    if (synth_cmd->parsed()) {
      require(opt.out, "--out");
      return cmd_synth(opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
