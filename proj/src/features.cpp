#include "multispan/features.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>
#include <string>

#include "multispan/numeric.hpp"

namespace multispan {

namespace {

std::string fold_case(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) out.push_back(static_cast<char>(std::tolower(c)));
  return out;
}

}  // namespace

Matrix featurize(const Example& ex, std::size_t dim, std::uint64_t seed) {
  if (dim < 8) throw std::invalid_argument("feature dim must be >= 8");
  const std::size_t m = ex.length();
  const std::size_t r = dim - 5;
  const std::size_t r_self = (r + 1) / 2;
  const std::size_t r_prev = r - r_self;

  std::set<std::string> question_words;
  for (const Token& t : ex.question_tokens) question_words.insert(fold_case(t.text));

  std::vector<std::string> folded(m);
  for (std::size_t i = 0; i < m; ++i) folded[i] = fold_case(ex.sequence[i].text);
  auto in_question = [&](std::size_t i) {
    return question_words.count(folded[i]) ? 1.0 : 0.0;
  };

  Matrix features(m, dim);
  for (std::size_t i = 0; i < m; ++i) {
    auto row = features.row(i);
    row[0] = i < ex.question_tokens.size() ? 0.0 : 1.0;
    row[1] = in_question(i);
    row[2] = i > 0 ? in_question(i - 1) : 0.0;
    row[3] = i + 1 < m ? in_question(i + 1) : 0.0;
    row[4] = m > 1 ? static_cast<double>(i) / static_cast<double>(m - 1) : 0.0;
    row[5 + hash_bytes(folded[i], seed) % r_self] += 1.0;
    row[5 + hash_bytes(folded[i], seed ^ 0x5bd1e995u) % r_self] += 1.0;
    if (r_prev > 0 && i > 0) {
      row[5 + r_self + hash_bytes(folded[i - 1], seed) % r_prev] += 1.0;
      row[5 + r_self + hash_bytes(folded[i - 1], seed ^ 0x5bd1e995u) % r_prev] += 1.0;
    }
  }
  return features;
}

}  // namespace multispan
