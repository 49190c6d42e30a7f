#include "multispan/heads.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace multispan {

FeedForwardGrad FeedForwardGrad::zeros_like(const FeedForward& f) {
  FeedForwardGrad g;
  g.w1 = Matrix(f.w1.rows, f.w1.cols);
  g.b1 = Vector(f.b1.size(), 0.0);
  g.w2 = Matrix(f.w2.rows, f.w2.cols);
  g.b2 = Vector(f.b2.size(), 0.0);
  return g;
}

namespace {

void glorot_fill(Matrix& m, Rng& rng) {
  double r = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
  for (double& v : m.data) v = rng.next_double(-r, r);
}

}  // namespace

FeedForward ff_init(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng) {
  FeedForward f;
  f.w1 = Matrix(hidden, in);
  f.b1 = Vector(hidden, 0.0);
  f.w2 = Matrix(out, hidden);
  f.b2 = Vector(out, 0.0);
  glorot_fill(f.w1, rng);
  glorot_fill(f.w2, rng);
  return f;
}

Vector ff_forward(const FeedForward& f, std::span<const double> x) {
  Vector h = matvec(f.w1, x);
  for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::max(0.0, h[i] + f.b1[i]);
  Vector y = matvec(f.w2, h);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += f.b2[i];
  return y;
}

void ff_backward(const FeedForward& f, std::span<const double> x,
                 std::span<const double> dy, FeedForwardGrad& grad) {
  // recompute hidden activations
  Vector pre = matvec(f.w1, x);
  for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += f.b1[i];
  Vector h(pre.size());
  for (std::size_t i = 0; i < pre.size(); ++i) h[i] = std::max(0.0, pre[i]);

  const std::size_t out = f.w2.rows, hid = f.w1.rows, in = f.w1.cols;
  Vector dh(hid, 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    const double g = dy[o];
    grad.b2[o] += g;
    for (std::size_t j = 0; j < hid; ++j) {
      grad.w2.at(o, j) += g * h[j];
      dh[j] += g * f.w2.at(o, j);
    }
  }
  for (std::size_t j = 0; j < hid; ++j) {
    if (pre[j] <= 0.0) continue;  // ReLU gate
    grad.b1[j] += dh[j];
    for (std::size_t k = 0; k < in; ++k) grad.w1.at(j, k) += dh[j] * x[k];
  }
}

TagDistribution tag_distribution(const Matrix& features, const FeedForward& params,
                                 TagScheme scheme) {
  if (!all_finite(features)) {
    throw std::invalid_argument("tag_distribution: non-finite feature values");
  }
  if (features.cols != params.in_dim() || params.out_dim() != tag_count(scheme)) {
    throw std::invalid_argument("tag_distribution: inconsistent shapes");
  }
  TagDistribution dist;
  dist.scheme = scheme;
  dist.log_p = Matrix(features.rows, tag_count(scheme));
  for (std::size_t i = 0; i < features.rows; ++i) {
    Vector logits = ff_forward(params, features.row(i));
    log_softmax_inplace(logits);
    std::copy(logits.begin(), logits.end(), dist.log_p.row(i).begin());
  }
  return dist;
}

SpanDistribution span_distribution(const Matrix& features,
                                   const SpanHeadParams& params) {
  if (features.rows == 0) {
    throw std::invalid_argument("span_distribution: empty sequence");
  }
  if (!all_finite(features)) {
    throw std::invalid_argument("span_distribution: non-finite feature values");
  }
  SpanDistribution dist;
  dist.log_p_start.resize(features.rows);
  dist.log_p_end.resize(features.rows);
  for (std::size_t i = 0; i < features.rows; ++i) {
    dist.log_p_start[i] = ff_forward(params.start, features.row(i))[0];
    dist.log_p_end[i] = ff_forward(params.end, features.row(i))[0];
  }
  log_softmax_inplace(dist.log_p_start);
  log_softmax_inplace(dist.log_p_end);
  return dist;
}

Vector mean_pool(const Matrix& features) {
  Vector pooled(features.cols, 0.0);
  if (features.rows == 0) return pooled;
  for (std::size_t i = 0; i < features.rows; ++i) {
    auto row = features.row(i);
    for (std::size_t j = 0; j < features.cols; ++j) pooled[j] += row[j];
  }
  for (double& v : pooled) v /= static_cast<double>(features.rows);
  return pooled;
}

Vector head_log_posterior(const Matrix& features, const FeedForward& selector) {
  Vector logits = ff_forward(selector, mean_pool(features));
  log_softmax_inplace(logits);
  return logits;
}

double combine_heads(std::span<const double> head_log_posterior,
                     std::span<const double> per_head_answer_log_prob) {
  if (head_log_posterior.size() != per_head_answer_log_prob.size()) {
    throw std::invalid_argument("combine_heads: length mismatch");
  }
  Vector terms(head_log_posterior.size());
  for (std::size_t z = 0; z < terms.size(); ++z) {
    terms[z] = head_log_posterior[z] + per_head_answer_log_prob[z];
  }
  return log_sum_exp(terms);
}

Model init_model(const ModelConfig& config, std::uint64_t seed) {
  if (!config.use_tase && !config.use_sse) {
    throw std::invalid_argument("init_model: no heads enabled");
  }
  Model model;
  model.config = config;
  Rng rng(seed);
  if (config.use_tase) {
    model.tase = ff_init(config.feature_dim, config.hidden_dim,
                         tag_count(config.scheme), rng);
  }
  if (config.use_sse) {
    SpanHeadParams sse;
    sse.start = ff_init(config.feature_dim, config.hidden_dim, 1, rng);
    sse.end = ff_init(config.feature_dim, config.hidden_dim, 1, rng);
    model.sse = sse;
  }
  model.selector =
      ff_init(config.feature_dim, config.hidden_dim, model.head_count(), rng);
  return model;
}

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols,
                        const std::string& what) {
  if (!j.is_array() || j.size() != rows) {
    throw std::runtime_error("model file: bad row count for " + what);
  }
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw std::runtime_error("model file: bad column count for " + what);
    }
    for (std::size_t k = 0; k < cols; ++k) m.at(i, k) = j[i][k].get<double>();
  }
  return m;
}

json ff_to_json(const FeedForward& f) {
  return {{"w1", matrix_to_json(f.w1)},
          {"b1", f.b1},
          {"w2", matrix_to_json(f.w2)},
          {"b2", f.b2}};
}

FeedForward ff_from_json(const json& j, std::size_t in, std::size_t hidden,
                         std::size_t out, const std::string& what) {
  FeedForward f;
  f.w1 = matrix_from_json(j.at("w1"), hidden, in, what + ".w1");
  f.b1 = j.at("b1").get<Vector>();
  f.w2 = matrix_from_json(j.at("w2"), out, hidden, what + ".w2");
  f.b2 = j.at("b2").get<Vector>();
  if (f.b1.size() != hidden || f.b2.size() != out) {
    throw std::runtime_error("model file: bad bias length for " + what);
  }
  return f;
}

constexpr int kFormatVersion = 1;

}  // namespace

void save_model(const std::string& path, const Model& model) {
  json j;
  j["format_version"] = kFormatVersion;
  j["scheme"] = std::string(scheme_name(model.config.scheme));
  j["feature_dim"] = model.config.feature_dim;
  j["hidden_dim"] = model.config.hidden_dim;
  j["feature_seed"] = model.config.feature_seed;
  json heads = json::object();
  if (model.tase) heads["tase"] = ff_to_json(*model.tase);
  if (model.sse) {
    heads["sse"] = {{"start", ff_to_json(model.sse->start)},
                    {"end", ff_to_json(model.sse->end)}};
  }
  heads["selector"] = ff_to_json(model.selector);
  j["heads"] = heads;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << j.dump(2) << "\n";
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("malformed model JSON in " + path + ": " + e.what());
  }
  if (j.value("format_version", -1) != kFormatVersion) {
    throw std::runtime_error("model file: unsupported format_version");
  }
  Model model;
  model.config.scheme = scheme_from_name(j.at("scheme").get<std::string>());
  model.config.feature_dim = j.at("feature_dim").get<std::size_t>();
  model.config.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  model.config.feature_seed = j.at("feature_seed").get<std::uint64_t>();
  const json& heads = j.at("heads");
  model.config.use_tase = heads.contains("tase");
  model.config.use_sse = heads.contains("sse");
  if (!model.config.use_tase && !model.config.use_sse) {
    throw std::runtime_error("model file: no heads present");
  }
  const std::size_t d = model.config.feature_dim;
  const std::size_t h = model.config.hidden_dim;
  if (model.config.use_tase) {
    model.tase = ff_from_json(heads.at("tase"), d, h,
                              tag_count(model.config.scheme), "tase");
  }
  if (model.config.use_sse) {
    SpanHeadParams sse;
    sse.start = ff_from_json(heads.at("sse").at("start"), d, h, 1, "sse.start");
    sse.end = ff_from_json(heads.at("sse").at("end"), d, h, 1, "sse.end");
    model.sse = sse;
  }
  std::size_t n_heads = (model.config.use_tase ? 1 : 0) + (model.config.use_sse ? 1 : 0);
  model.selector = ff_from_json(heads.at("selector"), d, h, n_heads, "selector");
  return model;
}

}  // namespace multispan
