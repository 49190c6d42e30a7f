#include "multispan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "multispan/token.hpp"

#include <json.hpp>

namespace multispan {

std::vector<std::string> normalize_answer(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t b = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (b == i) break;
    std::string w = normalize_word(s.substr(b, i - b));
    if (w.empty() || w == "a" || w == "an" || w == "the") continue;
    words.push_back(std::move(w));
  }
  return words;
}

double bag_f1(const std::vector<std::string>& pred,
              const std::vector<std::string>& gold) {
  if (pred.empty() || gold.empty()) return pred.empty() == gold.empty() ? 1.0 : 0.0;
  std::map<std::string, int> gold_counts;
  for (const auto& w : gold) ++gold_counts[w];
  int common = 0;
  for (const auto& w : pred) {
    auto it = gold_counts.find(w);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

// Hungarian algorithm (potentials + augmenting paths) on the square
// padding of the score matrix; padding cells score 0, which models
// leaving a span unmatched. Maximization via negation.
double max_weight_assignment(const Matrix& scores) {
  const std::size_t n = std::max(scores.rows, scores.cols);
  if (n == 0) return 0.0;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  auto cost = [&](std::size_t i, std::size_t j) -> double {
    if (i < scores.rows && j < scores.cols) return -scores.at(i, j);
    return 0.0;
  };

  // 1-indexed JV implementation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // column -> row
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    std::vector<std::size_t> way(n + 1, 0);
    std::size_t j0 = 0;
    match[0] = i;
    do {
      used[j0] = true;
      std::size_t i0 = match[j0], j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    std::size_t i = match[j];
    if (i >= 1 && i - 1 < scores.rows && j - 1 < scores.cols) {
      total += scores.at(i - 1, j - 1);
    }
  }
  return total;
}

EmF1 em_f1(const std::vector<std::string>& pred,
           const std::vector<std::string>& gold) {
  if (gold.empty()) throw std::invalid_argument("em_f1: empty gold answer");

  std::vector<std::vector<std::string>> pred_norm, gold_norm;
  pred_norm.reserve(pred.size());
  gold_norm.reserve(gold.size());
  for (const auto& s : pred) pred_norm.push_back(normalize_answer(s));
  for (const auto& s : gold) gold_norm.push_back(normalize_answer(s));

  auto sorted = [](std::vector<std::vector<std::string>> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  EmF1 out;
  out.em = sorted(pred_norm) == sorted(gold_norm) ? 1.0 : 0.0;

  if (pred_norm.empty()) {
    out.f1 = 0.0;
    return out;
  }
  Matrix pair_scores(pred_norm.size(), gold_norm.size());
  for (std::size_t i = 0; i < pred_norm.size(); ++i) {
    for (std::size_t j = 0; j < gold_norm.size(); ++j) {
      pair_scores.at(i, j) = bag_f1(pred_norm[i], gold_norm[j]);
    }
  }
  double matched = max_weight_assignment(pair_scores);
  out.f1 = matched / static_cast<double>(std::max(pred_norm.size(), gold_norm.size()));
  return out;
}

MetricReport evaluate(const std::vector<Example>& examples,
                      const Predictions& predictions) {
  MetricReport report;
  std::map<std::string, const Example*> by_id;
  for (const Example& ex : examples) {
    if (!by_id.emplace(ex.id, &ex).second) {
      throw std::invalid_argument("duplicate example id: " + ex.id);
    }
  }
  for (const auto& [id, _] : predictions) {
    if (!by_id.count(id)) {
      throw std::invalid_argument("prediction id matches no example: " + id);
    }
  }

  struct Accum {
    double em = 0.0, f1 = 0.0, spans = 0.0;
    std::size_t n = 0;
  };
  Accum total;
  std::map<std::size_t, Accum> by_count;
  std::map<std::string, Accum> by_type;

  static const std::vector<std::string> kNoPrediction;
  for (const Example& ex : examples) {
    auto it = predictions.find(ex.id);
    const std::vector<std::string>& pred =
        it != predictions.end() ? it->second : kNoPrediction;
    if (it == predictions.end()) ++report.missing_predictions;
    EmF1 scores = em_f1(pred, ex.gold.strings);
    const std::size_t gold_count = ex.gold.strings.size();
    const std::string type = gold_count > 1 ? "multi_span" : "single_span";
    for (Accum* acc : {&total, &by_count[gold_count], &by_type[type]}) {
      acc->em += scores.em;
      acc->f1 += scores.f1;
      acc->spans += static_cast<double>(pred.size());
      acc->n += 1;
    }
  }

  auto finish = [](const Accum& a) {
    BucketMetrics b;
    b.n = a.n;
    if (a.n > 0) {
      b.em = a.em / static_cast<double>(a.n);
      b.f1 = a.f1 / static_cast<double>(a.n);
      b.avg_predicted_spans = a.spans / static_cast<double>(a.n);
    }
    return b;
  };
  BucketMetrics overall = finish(total);
  report.em = overall.em;
  report.f1 = overall.f1;
  report.n = overall.n;
  for (const auto& [k, acc] : by_count) report.by_gold_span_count[k] = finish(acc);
  for (const auto& [k, acc] : by_type) report.by_question_type[k] = finish(acc);
  return report;
}

namespace {

nlohmann::json bucket_json(const BucketMetrics& b) {
  return {{"em", b.em},
          {"f1", b.f1},
          {"n", b.n},
          {"avg_predicted_spans", b.avg_predicted_spans}};
}

}  // namespace

std::string report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["em"] = report.em;
  j["f1"] = report.f1;
  j["n"] = report.n;
  j["missing_predictions"] = report.missing_predictions;
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [k, b] : report.by_gold_span_count) {
    counts[std::to_string(k)] = bucket_json(b);
  }
  j["by_gold_span_count"] = counts;
  nlohmann::json types = nlohmann::json::object();
  for (const auto& [k, b] : report.by_question_type) types[k] = bucket_json(b);
  j["by_question_type"] = types;
  return j.dump(2) + "\n";
}

std::string report_to_text(const MetricReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "n=%zu  EM=%.4f  F1=%.4f  (missing predictions: %zu)\n",
                report.n, report.em, report.f1, report.missing_predictions);
  out << line;
  out << "by gold span count:\n";
  for (const auto& [k, b] : report.by_gold_span_count) {
    std::snprintf(line, sizeof(line),
                  "  %zu span(s): n=%zu  EM=%.4f  F1=%.4f  avg predicted spans=%.2f\n",
                  k, b.n, b.em, b.f1, b.avg_predicted_spans);
    out << line;
  }
  out << "by question type:\n";
  for (const auto& [k, b] : report.by_question_type) {
    std::snprintf(line, sizeof(line), "  %s: n=%zu  EM=%.4f  F1=%.4f\n", k.c_str(),
                  b.n, b.em, b.f1);
    out << line;
  }
  return out.str();
}

Predictions load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open predictions file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed predictions JSON in " + path + ": " + e.what());
  }
  Predictions preds;
  for (const auto& [id, answers] : j.items()) {
    std::vector<std::string> list;
    for (const auto& a : answers) list.push_back(a.get<std::string>());
    preds[id] = std::move(list);
  }
  return preds;
}

void save_predictions(const std::string& path, const Predictions& preds) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, answers] : preds) j[id] = answers;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write predictions file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace multispan
