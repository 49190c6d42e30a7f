#include "multispan/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace multispan {

namespace {

using nlohmann::json;

std::vector<std::string> unique_sorted_nonempty(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](const std::string& s) { return s.empty(); }),
          v.end());
  return v;
}

Example make_example(std::string id, const std::string& question,
                     const std::string& passage) {
  Example ex;
  ex.id = std::move(id);
  ex.question_tokens = tokenize(question);
  ex.passage_tokens = tokenize(passage);
  ex.rebuild_sequence();
  return ex;
}

LoadResult load_drop(const json& root) {
  LoadResult result;
  for (const auto& [passage_id, entry] : root.items()) {
    if (!entry.is_object() || !entry.contains("passage") ||
        !entry.contains("qa_pairs")) {
      throw std::runtime_error("DROP: passage entry '" + passage_id +
                               "' lacks passage/qa_pairs");
    }
    const std::string passage = entry["passage"].get<std::string>();
    for (const auto& qa : entry["qa_pairs"]) {
      const std::string where = passage_id + "/" + qa.value("query_id", "?");
      if (!qa.contains("query_id") || !qa.contains("question") ||
          !qa.contains("answer")) {
        throw std::runtime_error("DROP: qa pair at '" + where +
                                 "' lacks query_id/question/answer");
      }
      const json& answer = qa["answer"];
      std::vector<std::string> spans;
      if (answer.contains("spans")) {
        for (const auto& s : answer["spans"]) spans.push_back(s.get<std::string>());
      }
      const std::string number =
          answer.contains("number") ? answer["number"].get<std::string>() : "";
      spans = unique_sorted_nonempty(std::move(spans));
      if (spans.empty() || !number.empty()) {
        ++result.skipped_non_span;
        continue;
      }
      Example ex = make_example(qa["query_id"].get<std::string>(),
                                qa["question"].get<std::string>(), passage);
      ex.gold.strings = std::move(spans);
      result.examples.push_back(std::move(ex));
    }
  }
  return result;
}

// Covering token range for a character interval [cs, ce) of the passage,
// shifted to sequence-relative indices.
bool char_range_to_span(const Example& ex, std::size_t cs, std::size_t ce,
                        TokenSpan& out) {
  const std::size_t offset = ex.question_tokens.size();
  bool found = false;
  for (std::size_t i = 0; i < ex.passage_tokens.size(); ++i) {
    const Token& t = ex.passage_tokens[i];
    if (t.char_end > cs && t.char_start < ce) {
      if (!found) {
        out.start = offset + i;
        found = true;
      }
      out.end = offset + i;
    }
  }
  return found;
}

LoadResult load_quoref(const json& root) {
  LoadResult result;
  if (!root.contains("data")) {
    throw std::runtime_error("Quoref: missing top-level 'data' array");
  }
  for (const auto& article : root["data"]) {
    for (const auto& paragraph : article.value("paragraphs", json::array())) {
      if (!paragraph.contains("context")) {
        throw std::runtime_error("Quoref: paragraph without 'context'");
      }
      const std::string context = paragraph["context"].get<std::string>();
      for (const auto& qa : paragraph.value("qas", json::array())) {
        const std::string where = qa.value("id", "?");
        if (!qa.contains("id") || !qa.contains("question") ||
            !qa.contains("answers")) {
          throw std::runtime_error("Quoref: qa '" + where +
                                   "' lacks id/question/answers");
        }
        struct RawAnswer {
          std::string text;
          std::size_t start;
        };
        std::vector<RawAnswer> raw;
        for (const auto& a : qa["answers"]) {
          if (!a.contains("text") || !a.contains("answer_start")) {
            throw std::runtime_error("Quoref: answer in qa '" + where +
                                     "' lacks text/answer_start");
          }
          raw.push_back({a["text"].get<std::string>(),
                         a["answer_start"].get<std::size_t>()});
        }
        std::vector<std::string> strings;
        for (const auto& a : raw) strings.push_back(a.text);
        strings = unique_sorted_nonempty(std::move(strings));
        if (strings.empty()) {
          ++result.skipped_non_span;
          continue;
        }
        Example ex = make_example(qa["id"].get<std::string>(),
                                  qa["question"].get<std::string>(), context);
        ex.gold.strings = strings;
        ex.gold.explicit_spans.assign(strings.size(), {});
        bool resolved_all = true;
        for (const auto& a : raw) {
          if (a.text.empty()) continue;
          TokenSpan span;
          if (!char_range_to_span(ex, a.start, a.start + a.text.size(), span)) {
            resolved_all = false;
            continue;
          }
          auto it = std::lower_bound(strings.begin(), strings.end(), a.text);
          std::size_t idx = static_cast<std::size_t>(it - strings.begin());
          auto& list = ex.gold.explicit_spans[idx];
          if (std::find(list.begin(), list.end(), span) == list.end()) {
            list.push_back(span);
          }
        }
        // Offsets that resolve to no token (dataset noise) drop the
        // explicit spans; occurrence search takes over downstream.
        if (!resolved_all &&
            std::any_of(ex.gold.explicit_spans.begin(), ex.gold.explicit_spans.end(),
                        [](const auto& l) { return l.empty(); })) {
          ex.gold.explicit_spans.clear();
        }
        result.examples.push_back(std::move(ex));
      }
    }
  }
  return result;
}

}  // namespace

DataFormat format_from_name(std::string_view name) {
  if (name == "drop" || name == "synth") return DataFormat::drop;
  if (name == "quoref") return DataFormat::quoref;
  throw std::invalid_argument("unknown data format: " + std::string(name));
}

LoadResult load_dataset(const std::string& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return format == DataFormat::drop ? load_drop(root) : load_quoref(root);
}

std::vector<TokenSpan> find_occurrences(std::span<const Token> sequence,
                                        std::string_view answer) {
  if (answer.empty()) throw std::invalid_argument("empty answer string");

  std::vector<std::string> target;
  for (const Token& t : tokenize(answer)) {
    std::string w = normalize_word(t.text);
    if (!w.empty()) target.push_back(std::move(w));
  }
  std::vector<TokenSpan> out;
  if (target.empty()) return out;

  // Indices of sequence tokens that carry content after normalization.
  std::vector<std::size_t> content_idx;
  std::vector<std::string> content_norm;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    std::string w = normalize_word(sequence[i].text);
    if (!w.empty()) {
      content_idx.push_back(i);
      content_norm.push_back(std::move(w));
    }
  }
  if (content_norm.size() < target.size()) return out;
  for (std::size_t i = 0; i + target.size() <= content_norm.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < target.size(); ++j) {
      if (content_norm[i + j] != target[j]) {
        match = false;
        break;
      }
    }
    if (match) {
      out.push_back(TokenSpan{content_idx[i], content_idx[i + target.size() - 1]});
    }
  }
  return out;
}

std::vector<std::vector<TokenSpan>> gold_occurrences(const Example& ex) {
  std::vector<std::vector<TokenSpan>> out;
  out.reserve(ex.gold.strings.size());
  for (std::size_t i = 0; i < ex.gold.strings.size(); ++i) {
    if (ex.gold.has_explicit_spans() && !ex.gold.explicit_spans[i].empty()) {
      out.push_back(ex.gold.explicit_spans[i]);
    } else {
      out.push_back(find_occurrences(ex.sequence, ex.gold.strings[i]));
    }
  }
  return out;
}

Example truncate_example(const Example& ex, std::size_t max_length) {
  Example cut = ex;
  if (cut.length() > max_length && cut.question_tokens.size() < max_length) {
    cut.passage_tokens.resize(max_length - cut.question_tokens.size());
    cut.rebuild_sequence();
    if (cut.gold.has_explicit_spans()) {
      for (auto& spans : cut.gold.explicit_spans) {
        std::erase_if(spans,
                      [&](const TokenSpan& s) { return s.end >= cut.length(); });
      }
    }
  }
  return cut;
}

TruncateResult truncate_and_filter(const std::vector<Example>& examples,
                                   std::size_t max_length) {
  if (max_length == 0) throw std::invalid_argument("max_length must be positive");
  TruncateResult result;
  for (const Example& ex : examples) {
    if (ex.question_tokens.size() >= max_length) {
      result.discarded.push_back({ex.id, "question exceeds max_length"});
      continue;
    }
    Example cut = truncate_example(ex, max_length);
    bool answerable = true;
    for (std::size_t i = 0; i < cut.gold.strings.size(); ++i) {
      bool has_explicit = cut.gold.has_explicit_spans() &&
                          !cut.gold.explicit_spans[i].empty();
      if (has_explicit) continue;
      if (find_occurrences(cut.sequence, cut.gold.strings[i]).empty()) {
        answerable = false;
        break;
      }
    }
    if (!answerable) {
      result.discarded.push_back({ex.id, "gold answer lost under truncation"});
      continue;
    }
    result.kept.push_back(std::move(cut));
  }
  return result;
}

}  // namespace multispan
