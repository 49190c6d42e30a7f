#ifndef MULTISPAN_HEADS_HPP
#define MULTISPAN_HEADS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "multispan/matrix.hpp"
#include "multispan/numeric.hpp"
#include "multispan/tagging.hpp"

namespace multispan {

// 2-layer feed-forward network with ReLU: y = w2 * relu(w1 x + b1) + b2.
// Shared across token positions.
struct FeedForward {
  Matrix w1;  // hidden x in
  Vector b1;
  Matrix w2;  // out x hidden
  Vector b2;

  std::size_t in_dim() const { return w1.cols; }
  std::size_t hidden_dim() const { return w1.rows; }
  std::size_t out_dim() const { return w2.rows; }

  bool operator==(const FeedForward&) const = default;
};

struct FeedForwardGrad {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;

  static FeedForwardGrad zeros_like(const FeedForward& f);
};

// Glorot-uniform initialization, radius sqrt(6/(fan_in+fan_out)).
FeedForward ff_init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);

Vector ff_forward(const FeedForward& f, std::span<const double> x);

// Accumulates d(loss)/d(params) into `grad` for upstream gradient `dy`
// at input `x` (features are fixed inputs, nothing propagates past w1).
void ff_backward(const FeedForward& f, std::span<const double> x,
                 std::span<const double> dy, FeedForwardGrad& grad);

// Per-token tag log-probabilities, rows normalized.
struct TagDistribution {
  TagScheme scheme = TagScheme::bio;
  Matrix log_p;  // m x |S|

  std::size_t length() const { return log_p.rows; }
};

// Start/end log-probabilities over tokens, each normalized over the m
// positions.
struct SpanDistribution {
  Vector log_p_start;
  Vector log_p_end;
};

struct SpanHeadParams {
  FeedForward start;  // d -> 1
  FeedForward end;    // d -> 1

  bool operator==(const SpanHeadParams&) const = default;
};

// row i = log_softmax(f(h_i)). Throws on non-finite features or shape
// mismatch.
TagDistribution tag_distribution(const Matrix& features, const FeedForward& params,
                                 TagScheme scheme);

// log_softmax over token scores for start and end. Throws on m = 0.
SpanDistribution span_distribution(const Matrix& features,
                                   const SpanHeadParams& params);

// Mean of feature rows; the selector's pooled input.
Vector mean_pool(const Matrix& features);

// Head posterior log p_head(z | h) from the pooled features.
Vector head_log_posterior(const Matrix& features, const FeedForward& selector);

// log sum_z exp(head_log_posterior[z] + per_head_answer_log_prob[z]).
// Throws on length mismatch. All-zero answer probabilities yield -inf.
double combine_heads(std::span<const double> head_log_posterior,
                     std::span<const double> per_head_answer_log_prob);

// Model container. Head order is fixed: tase first, then sse; the
// selector emits one logit per enabled head in that order.
struct ModelConfig {
  TagScheme scheme = TagScheme::io;
  std::size_t feature_dim = 32;
  std::size_t hidden_dim = 32;
  bool use_tase = true;
  bool use_sse = false;
  std::uint64_t feature_seed = 0;
};

struct Model {
  ModelConfig config;
  std::optional<FeedForward> tase;
  std::optional<SpanHeadParams> sse;
  FeedForward selector;

  std::size_t head_count() const {
    return (config.use_tase ? 1u : 0u) + (config.use_sse ? 1u : 0u);
  }
};

Model init_model(const ModelConfig& config, std::uint64_t seed);

// Versioned JSON with weights as nested arrays. The loader validates
// shapes against the declared dimensions.
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace multispan

#endif  // MULTISPAN_HEADS_HPP
