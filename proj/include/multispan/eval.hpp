#ifndef MULTISPAN_EVAL_HPP
#define MULTISPAN_EVAL_HPP

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "multispan/example.hpp"
#include "multispan/matrix.hpp"

namespace multispan {

// Lowercase, drop articles (a, an, the), strip punctuation except within
// numbers, collapse whitespace, split on spaces.
std::vector<std::string> normalize_answer(std::string_view s);

struct EmF1 {
  double em = 0.0;  // 0 or 1
  double f1 = 0.0;  // in [0, 1]
};

// Bag-of-words F1 between two normalized token lists.
double bag_f1(const std::vector<std::string>& pred,
              const std::vector<std::string>& gold);

// Maximum-weight one-to-one assignment on a (possibly rectangular) score
// matrix, exact via the Hungarian algorithm. Weights must be finite.
double max_weight_assignment(const Matrix& scores);

// Multi-span EM/F1. EM is multiset equality of normalized token lists.
// F1 builds the |pred| x |gold| matrix of pairwise bag F1 scores, takes
// the optimal one-to-one assignment, and divides the matched total by
// max(|pred|, |gold|). Throws std::invalid_argument on empty gold.
EmF1 em_f1(const std::vector<std::string>& pred,
           const std::vector<std::string>& gold);

struct BucketMetrics {
  double em = 0.0;
  double f1 = 0.0;
  std::size_t n = 0;
  double avg_predicted_spans = 0.0;
};

struct MetricReport {
  double em = 0.0;
  double f1 = 0.0;
  std::size_t n = 0;
  std::size_t missing_predictions = 0;
  std::map<std::size_t, BucketMetrics> by_gold_span_count;
  std::map<std::string, BucketMetrics> by_question_type;  // single_span, multi_span
};

using Predictions = std::map<std::string, std::vector<std::string>>;

// Per-example EM/F1 averaged over `examples`. Predictions are looked up
// by example id; missing ones score 0 and are counted. Buckets are keyed
// by gold span count and by single- vs multi-span question type.
// Throws std::invalid_argument if a prediction id matches no example.
MetricReport evaluate(const std::vector<Example>& examples,
                      const Predictions& predictions);

std::string report_to_json(const MetricReport& report);
std::string report_to_text(const MetricReport& report);

Predictions load_predictions(const std::string& path);
void save_predictions(const std::string& path, const Predictions& preds);

}  // namespace multispan

#endif  // MULTISPAN_EVAL_HPP
