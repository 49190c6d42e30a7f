#include "multispan/tagging.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

namespace multispan {

std::size_t tag_count(TagScheme scheme) {
  return scheme == TagScheme::bio ? 3u : 2u;
}

std::string_view scheme_name(TagScheme scheme) {
  return scheme == TagScheme::bio ? "bio" : "io";
}

TagScheme scheme_from_name(std::string_view name) {
  if (name == "bio") return TagScheme::bio;
  if (name == "io") return TagScheme::io;
  throw std::invalid_argument("unknown tag scheme: " + std::string(name));
}

bool is_valid_tagging(const Tagging& tagging) {
  if (tagging.scheme == TagScheme::io) return true;
  int prev = kTagO;
  for (int tag : tagging.tags) {
    if (tag == kTagBioI && prev == kTagO) return false;
    prev = tag;
  }
  return true;
}

Tagging spans_to_tagging(const std::vector<TokenSpan>& spans, std::size_t m,
                         TagScheme scheme) {
  std::vector<TokenSpan> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].start > sorted[i].end || sorted[i].end >= m) {
      throw std::invalid_argument("span out of range");
    }
    if (i > 0 && sorted[i].start <= sorted[i - 1].end) {
      throw std::invalid_argument("overlapping spans");
    }
  }
  Tagging tagging{scheme, std::vector<int>(m, kTagO)};
  const int inside = scheme == TagScheme::bio ? kTagBioI : kTagIoI;
  const int begin = scheme == TagScheme::bio ? kTagB : kTagIoI;
  for (const TokenSpan& s : sorted) {
    tagging.tags[s.start] = begin;
    for (std::size_t i = s.start + 1; i <= s.end; ++i) tagging.tags[i] = inside;
  }
  return tagging;
}

namespace {

std::string join_tokens(std::span<const Token> sequence, const TokenSpan& s) {
  std::string out;
  for (std::size_t i = s.start; i <= s.end; ++i) {
    if (i > s.start) out.push_back(' ');
    out += sequence[i].text;
  }
  return out;
}

}  // namespace

SpanSet tagging_to_spans(const Tagging& tagging,
                         std::span<const Token> sequence) {
  if (!is_valid_tagging(tagging)) {
    throw std::invalid_argument("invalid tagging");
  }
  const std::size_t m = tagging.tags.size();
  SpanSet out;
  if (tagging.scheme == TagScheme::bio) {
    std::size_t i = 0;
    while (i < m) {
      if (tagging.tags[i] == kTagB) {
        std::size_t j = i + 1;
        while (j < m && tagging.tags[j] == kTagBioI) ++j;
        TokenSpan range{i, j - 1};
        out.spans.push_back({range, join_tokens(sequence, range)});
        i = j;
      } else {
        ++i;
      }
    }
  } else {
    std::size_t i = 0;
    while (i < m) {
      if (tagging.tags[i] == kTagIoI) {
        std::size_t j = i + 1;
        while (j < m && tagging.tags[j] == kTagIoI) ++j;
        TokenSpan range{i, j - 1};
        out.spans.push_back({range, join_tokens(sequence, range)});
        i = j;
      } else {
        ++i;
      }
    }
  }
  return out;
}

namespace {

// Marks all occurrences. Overlaps resolved by keeping longest-first,
// then leftmost; the dropped ranges are substrings of kept ones in
// practice, so each answer surface survives inside some kept span.
Tagging fallback_tagging(
    const std::vector<std::vector<TokenSpan>>& occurrences_per_answer,
    std::size_t m, TagScheme scheme) {
  std::vector<TokenSpan> all;
  for (const auto& occs : occurrences_per_answer) {
    all.insert(all.end(), occs.begin(), occs.end());
  }
  std::sort(all.begin(), all.end(), [](const TokenSpan& a, const TokenSpan& b) {
    std::size_t la = a.end - a.start;
    std::size_t lb = b.end - b.start;
    if (la != lb) return la > lb;
    return a < b;
  });
  std::vector<TokenSpan> kept;
  for (const TokenSpan& cand : all) {
    bool clash = false;
    for (const TokenSpan& k : kept) {
      if (spans_overlap(cand, k)) {
        clash = true;
        break;
      }
    }
    if (!clash) kept.push_back(cand);
  }
  return spans_to_tagging(kept, m, scheme);
}

}  // namespace

EnumerationResult enumerate_correct_taggings(
    const std::vector<std::vector<TokenSpan>>& occurrences_per_answer,
    std::size_t m, TagScheme scheme, std::size_t cap) {
  if (cap < 1) throw std::invalid_argument("cap must be >= 1");
  for (const auto& occs : occurrences_per_answer) {
    if (occs.empty()) {
      throw std::invalid_argument(
          "answer string with zero occurrences (corpus filtering should "
          "prevent this)");
    }
  }

  std::set<std::vector<int>> distinct;
  std::vector<TokenSpan> chosen;
  bool over_cap = false;

  // Depth-first over (answer, nonempty occurrence subset) choices.
  // Conflicting ranges prune the branch; the distinct-tagging set is
  // abandoned as soon as it outgrows the cap.
  auto recurse = [&](auto&& self, std::size_t answer_idx) -> void {
    if (over_cap) return;
    if (answer_idx == occurrences_per_answer.size()) {
      Tagging t = spans_to_tagging(chosen, m, scheme);
      distinct.insert(std::move(t.tags));
      if (distinct.size() > cap) over_cap = true;
      return;
    }
    const auto& occs = occurrences_per_answer[answer_idx];
    const std::size_t n = occs.size();
    if (n >= 63) {
      over_cap = true;  // 2^n dwarfs any realistic cap
      return;
    }
    for (std::uint64_t mask = 1; mask < (1ull << n) && !over_cap; ++mask) {
      std::size_t pushed = 0;
      bool clash = false;
      for (std::size_t i = 0; i < n && !clash; ++i) {
        if (!(mask & (1ull << i))) continue;
        for (const TokenSpan& c : chosen) {
          if (spans_overlap(occs[i], c)) {
            clash = true;
            break;
          }
        }
        if (!clash) {
          chosen.push_back(occs[i]);
          ++pushed;
        }
      }
      if (!clash) self(self, answer_idx + 1);
      chosen.resize(chosen.size() - pushed);
    }
  };
  recurse(recurse, 0);

  EnumerationResult result;
  if (over_cap || distinct.empty()) {
    // Either the cap was exceeded or every combination conflicted; both
    // take the single all-occurrences tagging.
    result.taggings.push_back(fallback_tagging(occurrences_per_answer, m, scheme));
    result.fell_back = true;
    return result;
  }
  result.taggings.reserve(distinct.size());
  for (const auto& tags : distinct) {
    result.taggings.push_back(Tagging{scheme, tags});
  }
  return result;
}

std::string to_debug_string(const Tagging& tagging) {
  std::string out;
  for (std::size_t i = 0; i < tagging.tags.size(); ++i) {
    if (i > 0) out.push_back(' ');
    int t = tagging.tags[i];
    if (t == kTagO) {
      out.push_back('O');
    } else if (tagging.scheme == TagScheme::bio && t == kTagB) {
      out.push_back('B');
    } else {
      out.push_back('I');
    }
  }
  return out;
}

Tagging tagging_from_debug_string(std::string_view s, TagScheme scheme) {
  Tagging tagging{scheme, {}};
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) {
    if (tok == "O") {
      tagging.tags.push_back(kTagO);
    } else if (tok == "B" && scheme == TagScheme::bio) {
      tagging.tags.push_back(kTagB);
    } else if (tok == "I") {
      tagging.tags.push_back(scheme == TagScheme::bio ? kTagBioI : kTagIoI);
    } else {
      throw std::invalid_argument("bad tag token: " + tok);
    }
  }
  return tagging;
}

}  // namespace multispan
