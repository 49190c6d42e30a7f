#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <functional>

#include "multispan/dataset.hpp"
#include "multispan/features.hpp"
#include "multispan/objective.hpp"

using namespace multispan;

namespace {

constexpr double kAlmostZero = -1e300;  // exp() underflows to exactly 0

TagDistribution uniform_dist(std::size_t m, TagScheme scheme) {
  TagDistribution dist;
  dist.scheme = scheme;
  dist.log_p = Matrix(m, tag_count(scheme));
  const double v = std::log(1.0 / static_cast<double>(tag_count(scheme)));
  for (double& x : dist.log_p.data) x = v;
  return dist;
}

TagDistribution random_dist(std::size_t m, TagScheme scheme, Rng& rng) {
  TagDistribution dist;
  dist.scheme = scheme;
  dist.log_p = Matrix(m, tag_count(scheme));
  for (std::size_t i = 0; i < m; ++i) {
    auto row = dist.log_p.row(i);
    for (double& x : row) x = rng.next_double(-3.0, 3.0);
    log_softmax_inplace(row);
  }
  return dist;
}

// Probability exactly 1 on the given tagging, rows finite.
TagDistribution concentrated_dist(const Tagging& tagging) {
  TagDistribution dist;
  dist.scheme = tagging.scheme;
  dist.log_p = Matrix(tagging.tags.size(), tag_count(tagging.scheme));
  for (double& x : dist.log_p.data) x = kAlmostZero;
  for (std::size_t i = 0; i < tagging.tags.size(); ++i) {
    dist.log_p.at(i, static_cast<std::size_t>(tagging.tags[i])) = 0.0;
  }
  return dist;
}

// Up to `count` distinct valid taggings; short sequences may admit fewer
// than requested, so sampling is attempt-bounded with all-O as a floor.
std::vector<Tagging> random_taggings(std::size_t m, TagScheme scheme,
                                     std::size_t count, Rng& rng) {
  std::vector<Tagging> out;
  for (int attempt = 0; attempt < 400 && out.size() < count; ++attempt) {
    Tagging t{scheme, {}};
    for (std::size_t i = 0; i < m; ++i) {
      t.tags.push_back(static_cast<int>(rng.next_below(tag_count(scheme))));
    }
    if (!is_valid_tagging(t)) continue;
    bool dup = false;
    for (const Tagging& seen : out) dup = dup || seen == t;
    if (!dup) out.push_back(std::move(t));
  }
  if (out.empty()) out.push_back(Tagging{scheme, std::vector<int>(m, kTagO)});
  return out;
}

// Direct sum of per-tagging probability products, in linear space.
double marginal_oracle(const TagDistribution& dist,
                       const std::vector<Tagging>& taggings) {
  double total = 0.0;
  for (const Tagging& t : taggings) {
    double p = 1.0;
    for (std::size_t i = 0; i < t.tags.size(); ++i) {
      p *= std::exp(dist.log_p.at(i, static_cast<std::size_t>(t.tags[i])));
    }
    total += p;
  }
  return std::log(total);
}

// Floor of 1e-3 keeps the ratio meaningful for near-zero gradients,
// where central differences carry ~1e-9 of roundoff noise.
double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

// Central finite differences over a parameter vector against analytic
// gradients. `loss` re-evaluates the objective at the current values.
void check_gradient(std::vector<double*> params,
                    const std::vector<const double*>& analytic,
                    const std::function<double()>& loss, double step = 1e-5,
                    double tol = 1e-4) {
  REQUIRE(params.size() == analytic.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + step;
    const double up = loss();
    *params[i] = saved - step;
    const double down = loss();
    *params[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    CHECK(rel_err(fd, *analytic[i]) < tol);
  }
}

std::vector<const double*> grad_ptrs(const FeedForwardGrad& g) {
  std::vector<const double*> out;
  for (const double& v : g.w1.data) out.push_back(&v);
  for (const double& v : g.b1) out.push_back(&v);
  for (const double& v : g.w2.data) out.push_back(&v);
  for (const double& v : g.b2) out.push_back(&v);
  return out;
}

std::vector<double*> param_ptrs(FeedForward& f) {
  std::vector<double*> out;
  for (double& v : f.w1.data) out.push_back(&v);
  for (double& v : f.b1) out.push_back(&v);
  for (double& v : f.w2.data) out.push_back(&v);
  for (double& v : f.b2) out.push_back(&v);
  return out;
}

Matrix random_features(std::size_t m, std::size_t d, Rng& rng) {
  Matrix f(m, d);
  for (double& v : f.data) v = rng.next_double(-1.0, 1.0);
  return f;
}

}  // namespace

TEST_CASE("tagging_log_prob on the uniform distribution") {
  TagDistribution dist = uniform_dist(5, TagScheme::bio);
  Tagging t = tagging_from_debug_string("B O B O B", TagScheme::bio);
  CHECK(tagging_log_prob(dist, t) ==
        doctest::Approx(5.0 * std::log(1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("tagging_log_prob at certainty is exactly zero") {
  Tagging t = tagging_from_debug_string("B I O", TagScheme::bio);
  CHECK(tagging_log_prob(concentrated_dist(t), t) == 0.0);
}

TEST_CASE("tagging_log_prob hand instance") {
  TagDistribution dist;
  dist.scheme = TagScheme::bio;
  dist.log_p = Matrix(2, 3);
  const double row0[3] = {0.5, 0.3, 0.2};
  const double row1[3] = {0.1, 0.8, 0.1};
  for (std::size_t s = 0; s < 3; ++s) {
    dist.log_p.at(0, s) = std::log(row0[s]);
    dist.log_p.at(1, s) = std::log(row1[s]);
  }
  Tagging t = tagging_from_debug_string("O B", TagScheme::bio);
  CHECK(tagging_log_prob(dist, t) == doctest::Approx(std::log(0.4)).epsilon(1e-12));
}

TEST_CASE("tagging_log_prob rejects length mismatch") {
  TagDistribution dist = uniform_dist(3, TagScheme::bio);
  Tagging t = tagging_from_debug_string("B O", TagScheme::bio);
  CHECK_THROWS_AS(tagging_log_prob(dist, t), std::invalid_argument);
}

TEST_CASE("marginal_log_likelihood on the three-tagging instance") {
  TagDistribution dist = uniform_dist(5, TagScheme::bio);
  std::vector<Tagging> taggings = {
      tagging_from_debug_string("B O B O B", TagScheme::bio),
      tagging_from_debug_string("B O B O O", TagScheme::bio),
      tagging_from_debug_string("B O O O B", TagScheme::bio)};
  const double expected = std::log(3.0 * std::pow(1.0 / 3.0, 5.0));
  CHECK(marginal_log_likelihood(dist, taggings) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(marginal_log_likelihood(dist, taggings) ==
        doctest::Approx(marginal_oracle(dist, taggings)).epsilon(1e-12));
}

TEST_CASE("marginal_log_likelihood is exactly zero at a member certainty") {
  Tagging t = tagging_from_debug_string("B O B O B", TagScheme::bio);
  std::vector<Tagging> taggings = {
      t, tagging_from_debug_string("B O B O O", TagScheme::bio)};
  CHECK(marginal_log_likelihood(concentrated_dist(t), taggings) == 0.0);
}

TEST_CASE("marginal_log_likelihood of a singleton equals tagging_log_prob") {
  Rng rng(3);
  TagDistribution dist = random_dist(6, TagScheme::io, rng);
  Tagging t = random_taggings(6, TagScheme::io, 1, rng)[0];
  CHECK(marginal_log_likelihood(dist, {t}) == tagging_log_prob(dist, t));
}

TEST_CASE("marginal_log_likelihood rejects an empty list") {
  TagDistribution dist = uniform_dist(3, TagScheme::io);
  CHECK_THROWS_AS(marginal_log_likelihood(dist, {}), std::invalid_argument);
}

TEST_CASE("marginal_log_likelihood matches the sum-of-products oracle") {
  Rng rng(51);
  for (int it = 0; it < 200; ++it) {
    const std::size_t m = 2 + rng.next_below(9);  // up to 10
    TagScheme scheme = rng.next_below(2) == 0 ? TagScheme::bio : TagScheme::io;
    TagDistribution dist = random_dist(m, scheme, rng);
    auto taggings = random_taggings(m, scheme, 1 + rng.next_below(8), rng);
    const double got = marginal_log_likelihood(dist, taggings);
    const double want = marginal_oracle(dist, taggings);
    CHECK(std::abs(got - want) <= 1e-9 * std::max({1.0, std::abs(got), std::abs(want)}));
    CHECK(got <= 1e-12);
  }
}

TEST_CASE("marginal likelihood is bounded by the best member") {
  Rng rng(52);
  for (int it = 0; it < 100; ++it) {
    const std::size_t m = 2 + rng.next_below(6);
    TagDistribution dist = random_dist(m, TagScheme::bio, rng);
    auto taggings = random_taggings(m, TagScheme::bio, 1 + rng.next_below(5), rng);
    double best = -std::numeric_limits<double>::infinity();
    for (const Tagging& t : taggings) {
      best = std::max(best, tagging_log_prob(dist, t));
    }
    const double mll = marginal_log_likelihood(dist, taggings);
    CHECK(mll >= best - 1e-12);
    CHECK(mll <= best + std::log(static_cast<double>(taggings.size())) + 1e-12);
  }
}

TEST_CASE("duplicating a tagging shifts the marginal by log-sum-exp algebra") {
  Rng rng(53);
  TagDistribution dist = random_dist(5, TagScheme::io, rng);
  auto taggings = random_taggings(5, TagScheme::io, 3, rng);
  const double base = marginal_log_likelihood(dist, taggings);
  std::vector<Tagging> with_dup = taggings;
  with_dup.push_back(taggings[0]);
  const double dup = marginal_log_likelihood(dist, with_dup);
  const double expected = log_sum_exp(
      std::vector<double>{base, tagging_log_prob(dist, taggings[0])});
  CHECK(dup == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("marginal_nll_gradient is zero at a concentrated optimum") {
  Tagging t = tagging_from_debug_string("O I I O", TagScheme::io);
  Matrix g = marginal_nll_gradient(concentrated_dist(t), {t});
  for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("marginal_nll_gradient rows sum to zero") {
  Rng rng(54);
  TagDistribution dist = random_dist(6, TagScheme::bio, rng);
  auto taggings = random_taggings(6, TagScheme::bio, 4, rng);
  Matrix g = marginal_nll_gradient(dist, taggings);
  for (std::size_t i = 0; i < g.rows; ++i) {
    double sum = 0.0;
    for (std::size_t s = 0; s < g.cols; ++s) sum += g.at(i, s);
    CHECK(std::abs(sum) < 1e-12);
  }
}

TEST_CASE("marginal_nll_gradient matches finite differences on logits") {
  Rng rng(55);
  for (int it = 0; it < 20; ++it) {
    const std::size_t m = 4;
    TagScheme scheme = TagScheme::bio;
    Matrix logits(m, 3);
    for (double& v : logits.data) v = rng.next_double(-2.0, 2.0);
    auto taggings = random_taggings(m, scheme, 2, rng);

    auto dist_of = [&](const Matrix& raw) {
      TagDistribution d;
      d.scheme = scheme;
      d.log_p = raw;
      for (std::size_t i = 0; i < m; ++i) log_softmax_inplace(d.log_p.row(i));
      return d;
    };
    Matrix analytic = marginal_nll_gradient(dist_of(logits), taggings);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t s = 0; s < 3; ++s) {
        const double step = 1e-5;
        const double saved = logits.at(i, s);
        logits.at(i, s) = saved + step;
        const double up = -marginal_log_likelihood(dist_of(logits), taggings);
        logits.at(i, s) = saved - step;
        const double down = -marginal_log_likelihood(dist_of(logits), taggings);
        logits.at(i, s) = saved;
        CHECK(rel_err((up - down) / (2.0 * step), analytic.at(i, s)) < 1e-4);
      }
    }
  }
}

TEST_CASE("tag head parameter gradients match finite differences") {
  Rng rng(56);
  Matrix features = random_features(5, 8, rng);
  FeedForward params = ff_init(8, 6, 3, rng);
  auto taggings = random_taggings(5, TagScheme::bio, 3, rng);
  TagHeadLoss result = tag_head_loss(features, params, TagScheme::bio, taggings);
  check_gradient(param_ptrs(params), grad_ptrs(result.grad), [&] {
    return tag_head_loss(features, params, TagScheme::bio, taggings).loss;
  });
}

TEST_CASE("single_span_nll basics") {
  // certainty on the single occurrence
  Vector lps = {0.0, kAlmostZero, kAlmostZero};
  Vector lpe = {kAlmostZero, 0.0, kAlmostZero};
  CHECK(single_span_nll(lps, lpe, {{0, 1}}) == 0.0);

  // uniform over m=4, one occurrence: -log(1/16)
  Vector u(4, std::log(0.25));
  CHECK(single_span_nll(u, u, {{1, 2}}) ==
        doctest::Approx(-std::log(1.0 / 16.0)).epsilon(1e-12));
  // two occurrences: -log(2/16)
  CHECK(single_span_nll(u, u, {{1, 2}, {0, 3}}) ==
        doctest::Approx(-std::log(2.0 / 16.0)).epsilon(1e-12));
  CHECK_THROWS_AS(single_span_nll(u, u, {}), std::invalid_argument);
}

TEST_CASE("span head parameter gradients match finite differences") {
  Rng rng(57);
  Matrix features = random_features(6, 8, rng);
  SpanHeadParams params{ff_init(8, 6, 1, rng), ff_init(8, 6, 1, rng)};
  std::vector<TokenSpan> occurrences = {{1, 2}, {4, 5}};
  SpanHeadLoss result = span_head_loss(features, params, occurrences);

  auto loss = [&] { return span_head_loss(features, params, occurrences).loss; };
  check_gradient(param_ptrs(params.start), grad_ptrs(result.start_grad), loss);
  check_gradient(param_ptrs(params.end), grad_ptrs(result.end_grad), loss);
}

TEST_CASE("selector_nll basics") {
  Vector post = {std::log(0.7), std::log(0.3)};
  CHECK(selector_nll(post, {0, 1}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(selector_nll(post, {0}) == doctest::Approx(-std::log(0.7)).epsilon(1e-12));
  Vector uniform = {std::log(0.5), std::log(0.5)};
  CHECK(selector_nll(uniform, {1}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(selector_nll(post, {}), std::invalid_argument);
}

TEST_CASE("selector parameter gradients match finite differences") {
  Rng rng(58);
  Matrix features = random_features(5, 8, rng);
  FeedForward selector = ff_init(8, 6, 2, rng);
  std::vector<std::size_t> correct = {1};
  SelectorLoss result = selector_loss(features, selector, correct);
  check_gradient(param_ptrs(selector), grad_ptrs(result.grad), [&] {
    return selector_loss(features, selector, correct).loss;
  });
}

namespace {

std::vector<Example> tiny_dataset() {
  Example ex;
  ex.id = "tiny";
  ex.question_tokens = tokenize("find Z");
  ex.passage_tokens = tokenize("X Y Z W");
  ex.gold.strings = {"Z"};
  ex.rebuild_sequence();
  return {ex};
}

}  // namespace

TEST_CASE("train with zero learning rate leaves parameters unchanged") {
  TrainConfig config;
  config.learning_rate = 0.0;
  config.epochs = 3;
  config.seed = 4;
  config.feature_dim = 8;
  TrainResult result = train(tiny_dataset(), config);
  ModelConfig mc = result.model.config;
  Model fresh = init_model(mc, config.seed);
  CHECK(*result.model.tase == *fresh.tase);
  CHECK(result.model.selector == fresh.selector);
}

TEST_CASE("train overfits a one-example dataset") {
  TrainConfig config;
  config.epochs = 500;  // one example: 500 steps
  config.learning_rate = 2e-2;
  config.seed = 9;
  config.scheme = TagScheme::io;
  config.feature_dim = 8;
  auto data = tiny_dataset();
  TrainResult result = train(data, config);
  CHECK(result.trace.back().mean_loss < result.trace.front().mean_loss);

  // recompute the marginal NLL of the trained tag head
  const Example& ex = data[0];
  Matrix features =
      featurize(ex, config.feature_dim, result.model.config.feature_seed);
  TagDistribution dist =
      tag_distribution(features, *result.model.tase, TagScheme::io);
  auto taggings = enumerate_correct_taggings(gold_occurrences(ex), ex.length(),
                                             TagScheme::io, config.cap)
                      .taggings;
  CHECK(-marginal_log_likelihood(dist, taggings) < 1e-2);
}

TEST_CASE("train is deterministic given the seed") {
  TrainConfig config;
  config.epochs = 20;
  config.seed = 77;
  config.feature_dim = 8;
  TrainResult a = train(tiny_dataset(), config);
  TrainResult b = train(tiny_dataset(), config);
  CHECK(*a.model.tase == *b.model.tase);
  CHECK(a.model.selector == b.model.selector);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].mean_loss == b.trace[i].mean_loss);
  }
}

TEST_CASE("train rejects an empty dataset") {
  TrainConfig config;
  CHECK_THROWS_AS(train({}, config), std::invalid_argument);
}
