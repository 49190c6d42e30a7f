#include "multispan/synth.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "multispan/numeric.hpp"

#include <json.hpp>

namespace multispan {

namespace {

const std::vector<std::string> kMarkers = {"alpha", "bravo", "echo", "kilo",
                                           "tango"};
const std::vector<std::string> kAnswers = {
    "falcon", "tiger", "orca",  "lynx",  "bison",  "heron",
    "viper",  "otter", "raven", "moose", "condor", "ibex"};
const std::vector<std::string> kFillers = {
    "stone",  "river", "cloud",  "meadow", "ember",  "willow",
    "harbor", "frost", "quill",  "lantern", "cedar", "prairie",
    "anchor", "spark", "garnet", "tundra"};

// Passage building blocks: filler runs separate the inserted units, so a
// bare answer copy is never itself preceded by the question's marker and
// a decoy marker is always followed by a filler.
struct Unit {
  std::vector<std::string> tokens;
};

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace

std::string synth_dataset_json(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("synth: n must be >= 1");
  Rng rng(seed);
  nlohmann::json root = nlohmann::json::object();

  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::string& marker = kMarkers[rng.next_below(kMarkers.size())];

    double roll = rng.next_double();
    std::size_t span_count = roll < 0.45 ? 1 : roll < 0.80 ? 2 : 3;
    std::vector<std::string> answer_pool = kAnswers;
    rng.shuffle(answer_pool);
    std::vector<std::string> answers(answer_pool.begin(),
                                     answer_pool.begin() + span_count);

    std::vector<Unit> units;
    for (const std::string& a : answers) {
      units.push_back(Unit{{marker, a}});
      if (rng.next_double() < 0.30) units.push_back(Unit{{marker, a}});
      if (rng.next_double() < 0.30) units.push_back(Unit{{a}});
    }
    if (rng.next_double() < 0.40) {
      // decoy marker; its successor is filler, so it answers nothing
      std::string other = kMarkers[rng.next_below(kMarkers.size())];
      if (other != marker) units.push_back(Unit{{other}});
    }
    if (rng.next_double() < 0.50) {
      // answer-vocabulary word that is not part of this gold answer
      const std::string& w = answer_pool[span_count +
                                         rng.next_below(answer_pool.size() - span_count)];
      units.push_back(Unit{{w}});
    }
    rng.shuffle(units);

    std::size_t unit_tokens = 0;
    for (const Unit& u : units) unit_tokens += u.tokens.size();
    const std::size_t target_len =
        static_cast<std::size_t>(rng.next_int(20, 60));
    // one filler slot before each unit plus a trailing one
    std::size_t filler_budget = target_len > unit_tokens + units.size() + 1
                                    ? target_len - unit_tokens
                                    : units.size() + 1;
    std::vector<std::size_t> gap_sizes(units.size() + 1, 1);
    for (std::size_t extra = filler_budget - gap_sizes.size(); extra > 0; --extra) {
      ++gap_sizes[rng.next_below(gap_sizes.size())];
    }

    std::vector<std::string> passage_tokens;
    for (std::size_t u = 0; u <= units.size(); ++u) {
      for (std::size_t g = 0; g < gap_sizes[u]; ++g) {
        passage_tokens.push_back(kFillers[rng.next_below(kFillers.size())]);
      }
      if (u < units.size()) {
        for (const std::string& t : units[u].tokens) passage_tokens.push_back(t);
      }
    }

    const std::string passage_id = "p" + std::to_string(idx);
    nlohmann::json qa;
    qa["query_id"] = "q" + std::to_string(idx);
    qa["question"] = "which words follow " + marker + " ?";
    std::sort(answers.begin(), answers.end());
    qa["answer"] = {{"number", ""},
                    {"date", nlohmann::json::object()},
                    {"spans", answers}};
    root[passage_id] = {{"passage", join(passage_tokens)},
                        {"qa_pairs", nlohmann::json::array({qa})}};
  }
  return root.dump(2) + "\n";
}

void synth_generate(const std::string& path, std::size_t n, std::uint64_t seed) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  out << synth_dataset_json(n, seed);
}

}  // namespace multispan
