#ifndef MULTISPAN_TOKEN_HPP
#define MULTISPAN_TOKEN_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace multispan {

// A surface token with byte offsets into its source text.
// Invariant: text == source[char_start, char_end), char_start < char_end,
// and tokens of one source are disjoint and in increasing offset order.
struct Token {
  std::string text;
  std::size_t char_start = 0;  // inclusive
  std::size_t char_end = 0;    // exclusive

  bool operator==(const Token&) const = default;
};

// Splits on ASCII whitespace and detaches leading/trailing ASCII
// punctuation of each chunk as single-character tokens. Interior
// punctuation ("45,000", "mid-air") stays in place. Multi-byte UTF-8
// sequences are never split. Empty input gives an empty list.
std::vector<Token> tokenize(std::string_view text);

bool is_ascii_punct(unsigned char c);

// Lowercases ASCII letters; strips punctuation unless the token is a
// well-formed number ("45,000", "3.5"), which is kept verbatim. This is
// the per-word rule the evaluation metric uses; occurrence matching uses
// it too so that surface variants of an answer line up.
std::string normalize_word(std::string_view word);

}  // namespace multispan

#endif  // MULTISPAN_TOKEN_HPP
