#include "multispan/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "multispan/dataset.hpp"
#include "multispan/features.hpp"

namespace multispan {

double tagging_log_prob(const TagDistribution& dist, const Tagging& tagging) {
  if (tagging.tags.size() != dist.length()) {
    throw std::invalid_argument("tagging_log_prob: length mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < tagging.tags.size(); ++i) {
    acc += dist.log_p.at(i, static_cast<std::size_t>(tagging.tags[i]));
  }
  return acc;
}

double marginal_log_likelihood(const TagDistribution& dist,
                               const std::vector<Tagging>& taggings) {
  if (taggings.empty()) {
    throw std::invalid_argument("marginal_log_likelihood: no taggings");
  }
  Vector lps(taggings.size());
  for (std::size_t t = 0; t < taggings.size(); ++t) {
    lps[t] = tagging_log_prob(dist, taggings[t]);
  }
  return log_sum_exp(lps);
}

Matrix marginal_nll_gradient(const TagDistribution& dist,
                             const std::vector<Tagging>& taggings) {
  if (taggings.empty()) {
    throw std::invalid_argument("marginal_nll_gradient: no taggings");
  }
  const std::size_t m = dist.length();
  const std::size_t s_count = dist.log_p.cols;

  Vector lps(taggings.size());
  for (std::size_t t = 0; t < taggings.size(); ++t) {
    lps[t] = tagging_log_prob(dist, taggings[t]);
  }
  const double mll = log_sum_exp(lps);

  Matrix grad(m, s_count);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t s = 0; s < s_count; ++s) {
      grad.at(i, s) = std::exp(dist.log_p.at(i, s));
    }
  }
  for (std::size_t t = 0; t < taggings.size(); ++t) {
    const double w = std::exp(lps[t] - mll);  // posterior weight of tagging t
    for (std::size_t i = 0; i < m; ++i) {
      grad.at(i, static_cast<std::size_t>(taggings[t].tags[i])) -= w;
    }
  }
  return grad;
}

double single_span_nll(std::span<const double> log_p_start,
                       std::span<const double> log_p_end,
                       const std::vector<TokenSpan>& gold_occurrences) {
  if (gold_occurrences.empty()) {
    throw std::invalid_argument("single_span_nll: no gold occurrences");
  }
  Vector terms(gold_occurrences.size());
  for (std::size_t k = 0; k < gold_occurrences.size(); ++k) {
    terms[k] = log_p_start[gold_occurrences[k].start] +
               log_p_end[gold_occurrences[k].end];
  }
  return -log_sum_exp(terms);
}

double selector_nll(std::span<const double> head_log_posterior,
                    const std::vector<std::size_t>& correct_heads) {
  if (correct_heads.empty()) {
    throw std::invalid_argument("selector_nll: empty correct set");
  }
  Vector terms(correct_heads.size());
  for (std::size_t k = 0; k < correct_heads.size(); ++k) {
    terms[k] = head_log_posterior[correct_heads[k]];
  }
  return -log_sum_exp(terms);
}

TagHeadLoss tag_head_loss(const Matrix& features, const FeedForward& params,
                          TagScheme scheme, const std::vector<Tagging>& taggings) {
  TagDistribution dist = tag_distribution(features, params, scheme);
  TagHeadLoss out;
  out.loss = -marginal_log_likelihood(dist, taggings);
  out.grad = FeedForwardGrad::zeros_like(params);
  Matrix dlogits = marginal_nll_gradient(dist, taggings);
  for (std::size_t i = 0; i < features.rows; ++i) {
    ff_backward(params, features.row(i), dlogits.row(i), out.grad);
  }
  return out;
}

SpanHeadLoss span_head_loss(const Matrix& features, const SpanHeadParams& params,
                            const std::vector<TokenSpan>& gold_occurrences) {
  SpanDistribution dist = span_distribution(features, params);
  SpanHeadLoss out;
  out.loss = single_span_nll(dist.log_p_start, dist.log_p_end, gold_occurrences);
  out.start_grad = FeedForwardGrad::zeros_like(params.start);
  out.end_grad = FeedForwardGrad::zeros_like(params.end);

  const std::size_t m = features.rows;
  // Posterior over occurrences, then its start/end marginals. The score
  // gradient is softmax minus marginal, per position.
  Vector terms(gold_occurrences.size());
  for (std::size_t k = 0; k < gold_occurrences.size(); ++k) {
    terms[k] = dist.log_p_start[gold_occurrences[k].start] +
               dist.log_p_end[gold_occurrences[k].end];
  }
  const double lse = log_sum_exp(terms);
  Vector q_start(m, 0.0), q_end(m, 0.0);
  for (std::size_t k = 0; k < gold_occurrences.size(); ++k) {
    const double w = std::exp(terms[k] - lse);
    q_start[gold_occurrences[k].start] += w;
    q_end[gold_occurrences[k].end] += w;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double d_start = std::exp(dist.log_p_start[i]) - q_start[i];
    const double d_end = std::exp(dist.log_p_end[i]) - q_end[i];
    ff_backward(params.start, features.row(i), std::span(&d_start, 1),
                out.start_grad);
    ff_backward(params.end, features.row(i), std::span(&d_end, 1), out.end_grad);
  }
  return out;
}

SelectorLoss selector_loss(const Matrix& features, const FeedForward& selector,
                           const std::vector<std::size_t>& correct_heads) {
  Vector pooled = mean_pool(features);
  Vector logits = ff_forward(selector, pooled);
  Vector post = logits;
  log_softmax_inplace(post);

  SelectorLoss out;
  out.loss = selector_nll(post, correct_heads);
  out.grad = FeedForwardGrad::zeros_like(selector);

  Vector members(correct_heads.size());
  for (std::size_t k = 0; k < correct_heads.size(); ++k) {
    members[k] = post[correct_heads[k]];
  }
  const double lse = log_sum_exp(members);
  Vector dscore(post.size(), 0.0);
  for (std::size_t z = 0; z < post.size(); ++z) dscore[z] = std::exp(post[z]);
  for (std::size_t k = 0; k < correct_heads.size(); ++k) {
    dscore[correct_heads[k]] -= std::exp(post[correct_heads[k]] - lse);
  }
  ff_backward(selector, pooled, dscore, out.grad);
  return out;
}

namespace {

void collect_params(FeedForward& f, std::vector<double*>& out) {
  for (double& v : f.w1.data) out.push_back(&v);
  for (double& v : f.b1) out.push_back(&v);
  for (double& v : f.w2.data) out.push_back(&v);
  for (double& v : f.b2) out.push_back(&v);
}

void collect_grads(const FeedForwardGrad& g, std::vector<const double*>& out) {
  for (const double& v : g.w1.data) out.push_back(&v);
  for (const double& v : g.b1) out.push_back(&v);
  for (const double& v : g.w2.data) out.push_back(&v);
  for (const double& v : g.b2) out.push_back(&v);
}

struct Adam {
  double lr, beta1, beta2, epsilon;
  Vector m, v;
  std::size_t t = 0;

  Adam(std::size_t n, const TrainConfig& c)
      : lr(c.learning_rate),
        beta1(c.adam_beta1),
        beta2(c.adam_beta2),
        epsilon(c.adam_epsilon),
        m(n, 0.0),
        v(n, 0.0) {}

  void step(const std::vector<double*>& params,
            const std::vector<const double*>& grads) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = *grads[i];
      m[i] = beta1 * m[i] + (1.0 - beta1) * g;
      v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      *params[i] -= lr * mhat / (std::sqrt(vhat) + epsilon);
    }
  }
};

struct PreparedExample {
  Matrix features;
  std::vector<Tagging> taggings;          // tag-head targets
  std::vector<TokenSpan> span_targets;    // span-head occurrences (single-string answers)
  std::vector<std::size_t> correct_heads; // indices into enabled-head order
  bool supported = false;
};

}  // namespace

TrainResult train(const std::vector<Example>& examples, const TrainConfig& config) {
  if (examples.empty()) throw std::invalid_argument("train: empty dataset");
  if (!config.use_tase && !config.use_sse) {
    throw std::invalid_argument("train: no heads enabled");
  }

  ModelConfig mc;
  mc.scheme = config.scheme;
  mc.feature_dim = config.feature_dim;
  mc.hidden_dim = config.hidden_dim == 0 ? config.feature_dim : config.hidden_dim;
  mc.use_tase = config.use_tase;
  mc.use_sse = config.use_sse;
  mc.feature_seed = mix64(config.seed);
  Model model = init_model(mc, config.seed);

  std::vector<PreparedExample> prepared;
  prepared.reserve(examples.size());
  for (const Example& ex : examples) {
    PreparedExample p;
    p.features = featurize(ex, mc.feature_dim, mc.feature_seed);
    auto occurrences = gold_occurrences(ex);
    for (std::size_t i = 0; i < occurrences.size(); ++i) {
      if (occurrences[i].empty()) {
        throw std::invalid_argument("train: example " + ex.id +
                                    " has an unlocatable gold string (run "
                                    "truncate_and_filter first)");
      }
    }
    const bool single_string = ex.gold.strings.size() == 1;
    std::size_t head_idx = 0;
    if (config.use_tase) {
      p.taggings = enumerate_correct_taggings(occurrences, ex.length(),
                                              config.scheme, config.cap)
                       .taggings;
      p.correct_heads.push_back(head_idx);
      ++head_idx;
    }
    if (config.use_sse) {
      if (single_string) {
        p.span_targets = occurrences[0];
        p.correct_heads.push_back(head_idx);
      }
      ++head_idx;
    }
    p.supported = !p.correct_heads.empty();
    prepared.push_back(std::move(p));
  }

  std::vector<double*> params;
  if (model.tase) collect_params(*model.tase, params);
  if (model.sse) {
    collect_params(model.sse->start, params);
    collect_params(model.sse->end, params);
  }
  collect_params(model.selector, params);
  Adam adam(params.size(), config);

  Rng shuffle_rng(mix64(config.seed ^ 0x7261696eull));  // "rain"
  std::vector<std::size_t> order(prepared.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    EpochStats stats;
    stats.epoch = epoch;
    std::size_t n_loss = 0, n_tag = 0, n_span = 0;

    for (std::size_t idx : order) {
      const PreparedExample& p = prepared[idx];
      if (!p.supported) continue;

      double total = 0.0;
      FeedForwardGrad tase_grad, sse_start_grad, sse_end_grad;
      if (model.tase && !p.taggings.empty()) {
        TagHeadLoss tl = tag_head_loss(p.features, *model.tase, config.scheme,
                                       p.taggings);
        total += tl.loss;
        stats.mean_tag_nll += tl.loss;
        ++n_tag;
        tase_grad = std::move(tl.grad);
      } else if (model.tase) {
        tase_grad = FeedForwardGrad::zeros_like(*model.tase);
      }
      if (model.sse) {
        if (!p.span_targets.empty()) {
          SpanHeadLoss sl = span_head_loss(p.features, *model.sse, p.span_targets);
          total += sl.loss;
          stats.mean_span_nll += sl.loss;
          ++n_span;
          sse_start_grad = std::move(sl.start_grad);
          sse_end_grad = std::move(sl.end_grad);
        } else {
          sse_start_grad = FeedForwardGrad::zeros_like(model.sse->start);
          sse_end_grad = FeedForwardGrad::zeros_like(model.sse->end);
        }
      }
      SelectorLoss sel = selector_loss(p.features, model.selector, p.correct_heads);
      total += sel.loss;
      stats.mean_selector_nll += sel.loss;

      if (!std::isfinite(total)) {
        throw std::runtime_error("train: non-finite loss at example " +
                                 examples[idx].id + ", epoch " +
                                 std::to_string(epoch));
      }
      stats.mean_loss += total;
      ++n_loss;

      std::vector<const double*> grads;
      if (model.tase) collect_grads(tase_grad, grads);
      if (model.sse) {
        collect_grads(sse_start_grad, grads);
        collect_grads(sse_end_grad, grads);
      }
      collect_grads(sel.grad, grads);
      adam.step(params, grads);
    }

    if (n_loss > 0) stats.mean_loss /= static_cast<double>(n_loss);
    if (n_tag > 0) stats.mean_tag_nll /= static_cast<double>(n_tag);
    if (n_span > 0) stats.mean_span_nll /= static_cast<double>(n_span);
    if (n_loss > 0) stats.mean_selector_nll /= static_cast<double>(n_loss);
    result.trace.push_back(stats);
  }
  result.model = std::move(model);
  return result;
}

void write_loss_trace(const std::string& path, const std::vector<EpochStats>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write loss trace: " + path);
  out << "epoch,mean_loss,mean_tag_nll,mean_span_nll,mean_selector_nll\n";
  char line[256];
  for (const EpochStats& s : trace) {
    std::snprintf(line, sizeof(line), "%zu,%.10g,%.10g,%.10g,%.10g\n", s.epoch,
                  s.mean_loss, s.mean_tag_nll, s.mean_span_nll,
                  s.mean_selector_nll);
    out << line;
  }
}

}  // namespace multispan
