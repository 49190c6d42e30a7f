#include "multispan/token.hpp"

#include <cctype>

namespace multispan {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Digits with optional comma grouping and one decimal point, e.g.
// "45,000", "1909", "3.5". Sign prefixes are not numbers here; the
// tokenizer already detached them.
bool is_number_word(std::string_view w) {
  bool saw_digit = false;
  bool saw_dot = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(w[i]);
    if (std::isdigit(c)) {
      saw_digit = true;
    } else if (c == ',') {
      // comma must sit between digits
      if (i == 0 || i + 1 == w.size() || !std::isdigit(static_cast<unsigned char>(w[i - 1])) ||
          !std::isdigit(static_cast<unsigned char>(w[i + 1]))) {
        return false;
      }
    } else if (c == '.') {
      if (saw_dot || i == 0 || i + 1 == w.size()) return false;
      saw_dot = true;
    } else {
      return false;
    }
  }
  return saw_digit;
}

}  // namespace

bool is_ascii_punct(unsigned char c) {
  return c < 0x80 && std::ispunct(c) != 0;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  auto emit = [&](std::size_t b, std::size_t e) {
    tokens.push_back(Token{std::string(text.substr(b, e - b)), b, e});
  };

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    if (is_ascii_space(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t chunk_end = i;
    while (chunk_end < n &&
           !is_ascii_space(static_cast<unsigned char>(text[chunk_end]))) {
      ++chunk_end;
    }
    std::size_t b = i;
    std::size_t e = chunk_end;
    while (b < e && is_ascii_punct(static_cast<unsigned char>(text[b]))) {
      emit(b, b + 1);
      ++b;
    }
    std::size_t core_end = e;
    while (core_end > b &&
           is_ascii_punct(static_cast<unsigned char>(text[core_end - 1]))) {
      --core_end;
    }
    if (b < core_end) emit(b, core_end);
    for (std::size_t p = core_end; p < e; ++p) emit(p, p + 1);
    i = chunk_end;
  }
  return tokens;
}

std::string normalize_word(std::string_view word) {
  if (is_number_word(word)) return std::string(word);
  std::string out;
  out.reserve(word.size());
  for (unsigned char c : word) {
    if (is_ascii_punct(c)) continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace multispan
