#ifndef MULTISPAN_NUMERIC_HPP
#define MULTISPAN_NUMERIC_HPP

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace multispan {

// log(sum_i exp(x_i)), max-shifted. Empty input or all -inf yields -inf.
double log_sum_exp(std::span<const double> xs);

// In-place log-softmax over a row of logits.
void log_softmax_inplace(std::span<double> row);

// splitmix64 finalizer (multiply-xorshift mixing).
std::uint64_t mix64(std::uint64_t x);

// FNV-1a over the bytes of `s`, salted with `seed` and finalized with
// mix64. Fully specified, so bucket assignments are identical across
// platforms and compilers.
std::uint64_t hash_bytes(std::string_view s, std::uint64_t seed);

// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the
// standard, but the std distribution objects are not; this wrapper
// derives doubles and bounded ints directly from the raw stream so that
// seeded runs are reproducible everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n) { return engine_() % n; }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next_below(
                    static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Fisher-Yates with explicit draws (std::shuffle is
  // implementation-defined).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace multispan

#endif  // MULTISPAN_NUMERIC_HPP
