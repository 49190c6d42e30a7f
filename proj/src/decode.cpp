#include "multispan/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "multispan/eval.hpp"
#include "multispan/features.hpp"

namespace multispan {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool bio_transition_ok(int prev, int next) {
  return !(next == kTagBioI && prev == kTagO);
}

}  // namespace

Tagging viterbi_decode(const TagDistribution& dist) {
  if (dist.scheme != TagScheme::bio) {
    throw std::invalid_argument("viterbi_decode: expects the BIO scheme");
  }
  const std::size_t m = dist.length();
  Tagging out{TagScheme::bio, {}};
  if (m == 0) return out;
  const std::size_t s_count = 3;

  Matrix delta(m, s_count);
  std::vector<std::vector<int>> back(m, std::vector<int>(s_count, 0));
  for (std::size_t s = 0; s < s_count; ++s) {
    // position 0 follows a virtual O
    delta.at(0, s) = bio_transition_ok(kTagO, static_cast<int>(s))
                         ? dist.log_p.at(0, s)
                         : kNegInf;
  }
  for (std::size_t i = 1; i < m; ++i) {
    for (std::size_t s = 0; s < s_count; ++s) {
      double best = kNegInf;
      int best_prev = 0;
      for (std::size_t p = 0; p < s_count; ++p) {
        if (!bio_transition_ok(static_cast<int>(p), static_cast<int>(s))) continue;
        const double cand = delta.at(i - 1, p);
        if (cand > best) {  // ties keep the lower prev index
          best = cand;
          best_prev = static_cast<int>(p);
        }
      }
      delta.at(i, s) = best + dist.log_p.at(i, s);
      back[i][s] = best_prev;
    }
  }

  int state = 0;
  double best = kNegInf;
  for (std::size_t s = 0; s < s_count; ++s) {
    if (delta.at(m - 1, s) > best) {
      best = delta.at(m - 1, s);
      state = static_cast<int>(s);
    }
  }
  out.tags.assign(m, 0);
  for (std::size_t i = m; i-- > 0;) {
    out.tags[i] = state;
    state = back[i][static_cast<std::size_t>(state)];
  }
  return out;
}

Tagging greedy_io_decode(const TagDistribution& dist) {
  if (dist.scheme != TagScheme::io) {
    throw std::invalid_argument("greedy_io_decode: expects the IO scheme");
  }
  Tagging out{TagScheme::io, std::vector<int>(dist.length(), kTagO)};
  for (std::size_t i = 0; i < dist.length(); ++i) {
    if (dist.log_p.at(i, kTagIoI) > dist.log_p.at(i, kTagO)) {
      out.tags[i] = kTagIoI;
    }
  }
  return out;
}

TokenSpan single_span_decode(std::span<const double> log_p_start,
                             std::span<const double> log_p_end) {
  const std::size_t m = log_p_start.size();
  if (m == 0 || log_p_end.size() != m) {
    throw std::invalid_argument("single_span_decode: bad vector lengths");
  }
  std::size_t best_start = 0;
  TokenSpan best{0, 0};
  double best_score = log_p_start[0] + log_p_end[0];
  for (std::size_t e = 1; e < m; ++e) {
    if (log_p_start[e] > log_p_start[best_start]) best_start = e;
    const double score = log_p_start[best_start] + log_p_end[e];
    if (score > best_score) {
      best_score = score;
      best = TokenSpan{best_start, e};
    }
  }
  return best;
}

Tagging brute_force_decode(const TagDistribution& dist) {
  const std::size_t m = dist.length();
  if (m > 16) {
    throw std::invalid_argument("brute_force_decode: refusing m > 16");
  }
  const std::size_t s_count = tag_count(dist.scheme);
  Tagging best{dist.scheme, {}};
  if (m == 0) return best;

  std::vector<int> current(m, 0);
  double best_score = kNegInf;
  bool have_best = false;

  // Reverse-lexicographic comparison: last differing position decides,
  // lower tag index wins. Matches the decoders' backtrack tie-break.
  auto reverse_lex_less = [&](const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t i = m; i-- > 0;) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return false;
  };

  while (true) {
    Tagging cand{dist.scheme, current};
    if (is_valid_tagging(cand)) {
      double score = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        score += dist.log_p.at(i, static_cast<std::size_t>(current[i]));
      }
      if (!have_best || score > best_score ||
          (score == best_score && reverse_lex_less(current, best.tags))) {
        best_score = score;
        best.tags = current;
        have_best = true;
      }
    }
    // odometer increment
    std::size_t pos = 0;
    while (pos < m) {
      if (++current[pos] < static_cast<int>(s_count)) break;
      current[pos] = 0;
      ++pos;
    }
    if (pos == m) break;
  }
  return best;
}

SpanSet predict_answer(const Example& ex, const Model& model) {
  Matrix features = featurize(ex, model.config.feature_dim, model.config.feature_seed);
  Vector posterior = head_log_posterior(features, model.selector);

  // enabled-head order: tase, sse
  std::size_t pick = 0;
  for (std::size_t z = 1; z < posterior.size(); ++z) {
    if (posterior[z] > posterior[pick]) pick = z;
  }
  bool use_tase = model.config.use_tase && pick == 0;

  if (use_tase) {
    TagDistribution dist =
        tag_distribution(features, *model.tase, model.config.scheme);
    Tagging tagging = model.config.scheme == TagScheme::bio
                          ? viterbi_decode(dist)
                          : greedy_io_decode(dist);
    return tagging_to_spans(tagging, ex.sequence);
  }
  SpanDistribution dist = span_distribution(features, *model.sse);
  TokenSpan span = single_span_decode(dist.log_p_start, dist.log_p_end);
  Tagging one = spans_to_tagging({span}, ex.length(), model.config.scheme);
  return tagging_to_spans(one, ex.sequence);
}

std::vector<std::string> prediction_strings(const SpanSet& spans) {
  std::vector<std::string> out;
  std::vector<std::vector<std::string>> seen;
  for (const AnswerSpan& s : spans.spans) {
    std::vector<std::string> norm = normalize_answer(s.text);
    if (std::find(seen.begin(), seen.end(), norm) != seen.end()) continue;
    seen.push_back(std::move(norm));
    out.push_back(s.text);
  }
  return out;
}

}  // namespace multispan
