#ifndef MULTISPAN_SYNTH_HPP
#define MULTISPAN_SYNTH_HPP

#include <cstdint>
#include <string>

namespace multispan {

// Synthetic DROP-layout dataset for desk-scale learning checks.
//
// Each passage is 20-60 tokens from a small vocabulary. The question
// names a marker word; the gold answer is exactly the passage tokens
// that directly follow an occurrence of that marker, 1-3 distinct words
// per example. Some answers repeat (a second marker+answer pair, or a
// bare copy elsewhere) so tagging enumeration sees real ambiguity, and
// answer-vocabulary words also show up as non-answers in other examples
// so token identity alone cannot solve the task. Deterministic per seed.
std::string synth_dataset_json(std::size_t n, std::uint64_t seed);

void synth_generate(const std::string& path, std::size_t n, std::uint64_t seed);

}  // namespace multispan

#endif  // MULTISPAN_SYNTH_HPP
