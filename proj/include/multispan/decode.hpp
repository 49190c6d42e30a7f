#ifndef MULTISPAN_DECODE_HPP
#define MULTISPAN_DECODE_HPP

#include <vector>

#include "multispan/example.hpp"
#include "multispan/heads.hpp"

namespace multispan {

// Highest-probability valid BIO tagging via max-plus dynamic programming
// over the transition mask (O -> I and start -> I forbidden). Among
// score ties the lower tag index wins at each backtrack step, which
// selects the reverse-lexicographically smallest maximizer; the brute
// force oracle applies the same order. Throws if the scheme is not BIO.
Tagging viterbi_decode(const TagDistribution& dist);

// Per-token argmax for IO; ties go to O. Throws if the scheme is not IO.
Tagging greedy_io_decode(const TagDistribution& dist);

// argmax over s <= e of log_p_start[s] + log_p_end[e], O(m) by carrying
// the running best start. Ties prefer the smallest s, then smallest e.
TokenSpan single_span_decode(std::span<const double> log_p_start,
                             std::span<const double> log_p_end);

// Exhaustive argmax over all |S|^m valid taggings with the decoders'
// tie-break. Test oracle; refuses m > 16.
Tagging brute_force_decode(const TagDistribution& dist);

// Full inference: pick the argmax head under the selector posterior,
// decode it, and return the span set. An all-O tagging yields an empty
// set. Head order is tase then sse; posterior ties keep the earlier head.
SpanSet predict_answer(const Example& ex, const Model& model);

// Predicted spans as answer strings, duplicates (after evaluation
// normalization) removed, order of first appearance kept.
std::vector<std::string> prediction_strings(const SpanSet& spans);

}  // namespace multispan

#endif  // MULTISPAN_DECODE_HPP
