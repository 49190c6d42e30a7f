#ifndef MULTISPAN_DATASET_HPP
#define MULTISPAN_DATASET_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "multispan/example.hpp"

namespace multispan {

enum class DataFormat { drop, quoref };

DataFormat format_from_name(std::string_view name);

struct LoadResult {
  std::vector<Example> examples;
  std::size_t skipped_non_span = 0;  // number/date or unrecognized answers
};

// DROP layout: top-level map passage_id -> {passage, qa_pairs:[{query_id,
// question, answer:{number, date, spans}}]}. An answer counts as a span
// answer iff spans is nonempty and number is empty; everything else is
// skipped and counted. Quoref uses the SQuAD layout; character offsets
// become explicit token spans. Throws std::runtime_error on malformed
// JSON, naming the offending path.
LoadResult load_dataset(const std::string& path, DataFormat format);

struct DiscardRecord {
  std::string id;
  std::string reason;
};

struct TruncateResult {
  std::vector<Example> kept;
  std::vector<DiscardRecord> discarded;
};

// Passage-end truncation alone, no answerability filtering. Question
// tokens are never removed, so an over-long question stays over-long.
// Explicit spans that no longer fit are dropped.
Example truncate_example(const Example& ex, std::size_t max_length);

// Removes over-flowing tokens from the passage end so every kept example
// has length <= max_length. An example is discarded when its question
// alone exceeds max_length, or when after truncation some gold string
// has no occurrence and no surviving explicit span.
TruncateResult truncate_and_filter(const std::vector<Example>& examples,
                                   std::size_t max_length);

// All matches of the answer against consecutive sequence tokens, on
// normalized text (lowercased, punctuation stripped as in evaluation).
// Tokens that normalize to nothing (bare punctuation) are transparent:
// they can sit inside a match but never anchor its ends. Ranges are
// inclusive and sorted by start.
std::vector<TokenSpan> find_occurrences(std::span<const Token> sequence,
                                        std::string_view answer);

// Occurrence lists used as tagging targets, parallel to gold.strings:
// surviving explicit spans when present, otherwise text matches.
std::vector<std::vector<TokenSpan>> gold_occurrences(const Example& ex);

}  // namespace multispan

#endif  // MULTISPAN_DATASET_HPP
