#ifndef MULTISPAN_EXAMPLE_HPP
#define MULTISPAN_EXAMPLE_HPP

#include <string>
#include <vector>

#include "multispan/tagging.hpp"
#include "multispan/token.hpp"

namespace multispan {

// Gold answer: a set of strings, optionally with explicit token spans
// (Quoref gives character offsets; the loader resolves them). When
// explicit_spans is nonempty it is parallel to strings; inner lists hold
// sequence-relative inclusive token ranges and may empty out under
// truncation.
struct GoldAnswer {
  std::vector<std::string> strings;  // sorted, unique, nonempty entries
  std::vector<std::vector<TokenSpan>> explicit_spans;

  bool has_explicit_spans() const { return !explicit_spans.empty(); }
};

// One question with its passage. `sequence` is the concatenation
// [question_tokens; passage_tokens]; passage-relative offsets in
// explicit spans were already shifted by |question_tokens|.
struct Example {
  std::string id;
  std::vector<Token> question_tokens;
  std::vector<Token> passage_tokens;
  GoldAnswer gold;
  std::vector<Token> sequence;

  std::size_t length() const { return sequence.size(); }

  void rebuild_sequence() {
    sequence.clear();
    sequence.reserve(question_tokens.size() + passage_tokens.size());
    sequence.insert(sequence.end(), question_tokens.begin(),
                    question_tokens.end());
    sequence.insert(sequence.end(), passage_tokens.begin(),
                    passage_tokens.end());
  }
};

}  // namespace multispan

#endif  // MULTISPAN_EXAMPLE_HPP
