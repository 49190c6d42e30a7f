#ifndef MULTISPAN_TAGGING_HPP
#define MULTISPAN_TAGGING_HPP

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multispan/token.hpp"

namespace multispan {

enum class TagScheme { bio, io };

// Tag indices are fixed so serialized models and fixtures stay stable:
//   BIO: O=0, B=1, I=2      IO: O=0, I=1
inline constexpr int kTagO = 0;
inline constexpr int kTagB = 1;
inline constexpr int kTagBioI = 2;
inline constexpr int kTagIoI = 1;

std::size_t tag_count(TagScheme scheme);
std::string_view scheme_name(TagScheme scheme);
TagScheme scheme_from_name(std::string_view name);

struct Tagging {
  TagScheme scheme = TagScheme::bio;
  std::vector<int> tags;

  bool operator==(const Tagging&) const = default;
};

// Inclusive token range.
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const TokenSpan&) const = default;
};

inline bool spans_overlap(const TokenSpan& a, const TokenSpan& b) {
  return a.start <= b.end && b.start <= a.end;
}

struct AnswerSpan {
  TokenSpan range;
  std::string text;

  bool operator==(const AnswerSpan&) const = default;
};

// Non-overlapping spans sorted by start, with their surface strings.
struct SpanSet {
  std::vector<AnswerSpan> spans;

  bool operator==(const SpanSet&) const = default;
};

// BIO: false iff some I follows an O or opens the sequence (the sequence
// start counts as following an O). IO: always true.
bool is_valid_tagging(const Tagging& tagging);

// BIO: first token of each span gets B, the rest I. IO: span tokens get
// I. Throws std::invalid_argument on overlapping or out-of-range spans.
Tagging spans_to_tagging(const std::vector<TokenSpan>& spans, std::size_t m,
                         TagScheme scheme);

// BIO: a span opens at each B and extends through following I's.
// IO: maximal runs of I. Surfaces are the token texts joined with single
// spaces. Throws std::invalid_argument on an invalid BIO tagging.
SpanSet tagging_to_spans(const Tagging& tagging,
                         std::span<const Token> sequence);

struct EnumerationResult {
  std::vector<Tagging> taggings;  // deduplicated, sorted by tag sequence
  bool fell_back = false;
};

// The possibly-correct tagging set: for each answer string pick a
// nonempty subset of its occurrences, skip combinations whose chosen
// ranges overlap, and convert the union to a tagging. When more than
// `cap` distinct taggings would result (or no combination is
// conflict-free), falls back to the single tagging that marks all
// occurrences, resolving overlaps longest-first then leftmost.
// Throws std::invalid_argument if some answer has no occurrences.
EnumerationResult enumerate_correct_taggings(
    const std::vector<std::vector<TokenSpan>>& occurrences_per_answer,
    std::size_t m, TagScheme scheme, std::size_t cap);

// Debug form, e.g. "B O B O B".
std::string to_debug_string(const Tagging& tagging);
Tagging tagging_from_debug_string(std::string_view s, TagScheme scheme);

}  // namespace multispan

#endif  // MULTISPAN_TAGGING_HPP
