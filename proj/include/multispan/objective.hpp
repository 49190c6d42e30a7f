#ifndef MULTISPAN_OBJECTIVE_HPP
#define MULTISPAN_OBJECTIVE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "multispan/example.hpp"
#include "multispan/heads.hpp"

namespace multispan {

// sum_i log_p[i][T_i]. Throws on length mismatch.
double tagging_log_prob(const TagDistribution& dist, const Tagging& tagging);

// log sum_T prod_i p_i[T_i], via log-sum-exp over tagging log-probs.
// Throws on an empty tagging list.
double marginal_log_likelihood(const TagDistribution& dist,
                               const std::vector<Tagging>& taggings);

// Gradient of -marginal_log_likelihood w.r.t. the per-token logits
// feeding each row's softmax: softmax(row) - sum_T w_T onehot(T_i),
// where w_T is the posterior weight of tagging T.
Matrix marginal_nll_gradient(const TagDistribution& dist,
                             const std::vector<Tagging>& taggings);

// -log sum_(s,e) exp(log_p_start[s] + log_p_end[e]), marginalized over
// the gold occurrences. Throws on an empty occurrence list.
double single_span_nll(std::span<const double> log_p_start,
                       std::span<const double> log_p_end,
                       const std::vector<TokenSpan>& gold_occurrences);

// -log sum_{z in correct} exp(head_log_posterior[z]). Throws on an empty
// correct set.
double selector_nll(std::span<const double> head_log_posterior,
                    const std::vector<std::size_t>& correct_heads);

// Loss plus parameter gradients, for the optimizer and for finite
// difference checks.
struct TagHeadLoss {
  double loss = 0.0;
  FeedForwardGrad grad;
};
TagHeadLoss tag_head_loss(const Matrix& features, const FeedForward& params,
                          TagScheme scheme, const std::vector<Tagging>& taggings);

struct SpanHeadLoss {
  double loss = 0.0;
  FeedForwardGrad start_grad;
  FeedForwardGrad end_grad;
};
SpanHeadLoss span_head_loss(const Matrix& features, const SpanHeadParams& params,
                            const std::vector<TokenSpan>& gold_occurrences);

struct SelectorLoss {
  double loss = 0.0;
  FeedForwardGrad grad;
};
SelectorLoss selector_loss(const Matrix& features, const FeedForward& selector,
                           const std::vector<std::size_t>& correct_heads);

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  std::size_t cap = 1000;
  TagScheme scheme = TagScheme::io;
  bool use_tase = true;
  bool use_sse = false;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t feature_dim = 32;
  std::size_t hidden_dim = 0;  // 0 means feature_dim
};

struct EpochStats {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double mean_tag_nll = 0.0;
  double mean_span_nll = 0.0;
  double mean_selector_nll = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> trace;
};

// Per-example Adam updates with seeded shuffling; deterministic given
// the seed. Examples must already have passed corpus filtering (every
// gold string locatable); an example none of the enabled heads can
// express is skipped. Throws on an empty dataset or a non-finite loss.
TrainResult train(const std::vector<Example>& examples, const TrainConfig& config);

// CSV: epoch,mean_loss,mean_tag_nll,mean_span_nll,mean_selector_nll
void write_loss_trace(const std::string& path, const std::vector<EpochStats>& trace);

}  // namespace multispan

#endif  // MULTISPAN_OBJECTIVE_HPP
