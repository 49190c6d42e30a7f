#ifndef MULTISPAN_FEATURES_HPP
#define MULTISPAN_FEATURES_HPP

#include <cstdint>

#include "multispan/example.hpp"
#include "multispan/matrix.hpp"

namespace multispan {

// Per-token feature rows standing in for encoder representations.
// Layout, for dim d >= 8 (r = d - 5, split into r_self = ceil(r/2)
// token-identity buckets and r_prev = floor(r/2) previous-token buckets):
//   0: segment flag (0 question, 1 passage)
//   1: token text occurs in the question (case-folded)
//   2: previous token occurs in the question
//   3: next token occurs in the question
//   4: normalized position i/(m-1)
//   5 .. 5+r_self-1:      token identity, two hash probes
//   5+r_self .. d-1:      previous-token identity, two hash probes
// Deterministic function of (example, dim, seed); the hash is seeded
// FNV-1a with a splitmix64 finalizer, so rows are identical across
// platforms. Throws std::invalid_argument for dim < 8.
Matrix featurize(const Example& ex, std::size_t dim, std::uint64_t seed);

}  // namespace multispan

#endif  // MULTISPAN_FEATURES_HPP
