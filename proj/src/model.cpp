#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "imfault/error.hpp"
#include "imfault/kernels.hpp"
#include "imfault/model.hpp"
#include "imfault/rng.hpp"

namespace imfault::model {

namespace {

constexpr const char* kModule = "model";

[[noreturn]] void bad_config(const std::string& what) { throw Error(Errc::InvalidConfig, kModule, what); }

void add_bias(Matrix& m, const Matrix& b) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] += b(0, j);
  }
}

Matrix column_sums(const Matrix& m) {
  Matrix s(1, m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) kernels::axpy(1.0, m.row(i), s.row(0));
  return s;
}

Matrix relu(const Matrix& z) {
  Matrix h = z;
  for (double& v : h.values()) v = v > 0.0 ? v : 0.0;
  return h;
}

// grad *= [z > 0]
void relu_backward(Matrix& grad, const Matrix& z) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(z.values()[i] > 0.0)) grad.values()[i] = 0.0;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z)
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto in = logits.row(i);
    auto out = p.row(i);
    const double m = *std::max_element(in.begin(), in.end());
    double s = 0.0;
    for (std::size_t j = 0; j < in.size(); ++j) s += (out[j] = std::exp(in[j] - m));
    for (double& v : out) v /= s;
  }
  return p;
}

double log_softmax_at(std::span<const double> logits, std::size_t k) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  return logits[k] - m - std::log(s);
}

Matrix glorot(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  Matrix w(fan_in, fan_out);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Rng rng(seed);
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

std::size_t severity_bin(double severity, std::size_t bins) {
  const double pos = std::clamp(severity, 0.0, 1.0) * static_cast<double>(bins - 1);
  return static_cast<std::size_t>(std::lround(pos));
}

}  // namespace

std::string to_string(Ablation a) {
  switch (a) {
    case Ablation::Full: return "full";
    case Ablation::NoReweight: return "no_reweight";
    case Ablation::NoSeverity: return "no_severity";
    case Ablation::NoFreqFeatures: return "no_freq_features";
  }
  return "full";
}

Ablation ablation_from_string(const std::string& s) {
  for (auto a : {Ablation::Full, Ablation::NoReweight, Ablation::NoSeverity, Ablation::NoFreqFeatures})
    if (to_string(a) == s) return a;
  bad_config("unknown ablation '" + s + "'");
}

std::string variant_name(Ablation a) {
  switch (a) {
    case Ablation::Full: return "GNN-ASE";
    case Ablation::NoReweight: return "GNN-ASE@1";
    case Ablation::NoSeverity: return "GNN-ASE@2";
    case Ablation::NoFreqFeatures: return "GNN-ASE@3";
  }
  return "GNN-ASE";
}

std::string to_string(SeverityMode m) { return m == SeverityMode::Regression ? "regression" : "bins"; }

SeverityMode severity_mode_from_string(const std::string& s) {
  if (s == "regression") return SeverityMode::Regression;
  if (s == "bins") return SeverityMode::Bins;
  bad_config("unknown severity mode '" + s + "'");
}

void ModelConfig::validate() const {
  if (input_dim == 0 || embed_dim == 0 || gcn1_dim == 0 || gcn2_dim == 0 || severity_dim == 0)
    bad_config("layer dimensions must be positive");
  if (type_classes != 3) bad_config("type_classes: the type head has exactly 3 classes");
  if (!(learning_rate > 0.0)) bad_config("learning_rate: must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) bad_config("dropout: must lie in [0, 1)");
  if (!(beta >= 0.0 && beta <= 1.0)) bad_config("beta: must lie in [0, 1]");
  if (batch == 0) bad_config("batch: must be >= 1");
  if (lambda_anomaly < 0.0 || lambda_severity < 0.0 || lambda_type < 0.0) bad_config("loss weights must be >= 0");
  if (severity_mode == SeverityMode::Bins && severity_bins < 2) bad_config("severity_bins: must be >= 2");
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  z.for_each([](const char*, Matrix& m) { m.fill(0.0); });
  return z;
}

bool Parameters::all_finite() const {
  bool ok = true;
  for_each([&](const char*, const Matrix& m) { ok = ok && m.all_finite(); });
  return ok;
}

bool Parameters::is_severity_tensor(std::string_view name) { return name.starts_with("severity"); }

ModelState init_state(const ModelConfig& config) {
  config.validate();
  ModelState s;
  s.config = config;
  auto& p = s.params;
  // one independent stream per tensor: dropping a head never shifts the others
  auto w = [&](const char* name, std::size_t in, std::size_t out) { return glorot(in, out, derive_seed(config.seed, name)); };
  p.embed_w = w("init/embed_w", config.input_dim, config.embed_dim);
  p.embed_b = Matrix(1, config.embed_dim);
  p.gcn1_w = w("init/gcn1_w", config.embed_dim, config.gcn1_dim);
  p.gcn1_b = Matrix(1, config.gcn1_dim);
  p.gcn2_w = w("init/gcn2_w", config.gcn1_dim, config.gcn2_dim);
  p.gcn2_b = Matrix(1, config.gcn2_dim);
  p.anomaly_w = w("init/anomaly_w", config.gcn2_dim, 1);
  p.anomaly_b = Matrix(1, 1);
  p.type_w = w("init/type_w", config.gcn2_dim, config.type_classes);
  p.type_b = Matrix(1, config.type_classes);
  if (config.has_severity_head()) {
    const std::size_t out = config.severity_mode == SeverityMode::Bins ? config.severity_bins : 1;
    p.severity1_w = w("init/severity1_w", config.gcn2_dim, config.severity_dim);
    p.severity1_b = Matrix(1, config.severity_dim);
    p.severity2_w = w("init/severity2_w", config.severity_dim, out);
    p.severity2_b = Matrix(1, out);
  }
  return s;
}

Adjacency normalized_adjacency(std::size_t nodes, const std::vector<Edge>& edges, std::span<const double> weights) {
  if (weights.size() != edges.size())
    throw Error(Errc::ShapeMismatch, kModule,
                std::to_string(weights.size()) + " weights for " + std::to_string(edges.size()) + " edges");
  std::vector<double> degree(nodes, 1.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double w = weights[e];
    if (!(w >= 0.0)) throw Error(Errc::NegativeWeight, kModule, "edge " + std::to_string(e) + " has weight " + std::to_string(w));
    if (edges[e].i >= nodes || edges[e].j >= nodes)
      throw Error(Errc::ShapeMismatch, kModule, "edge " + std::to_string(e) + " endpoint out of range");
    degree[edges[e].i] += w;
    degree[edges[e].j] += w;
  }
  Adjacency adj;
  adj.rows.resize(nodes);
  for (std::size_t i = 0; i < nodes; ++i) adj.rows[i].push_back({i, 1.0 / degree[i]});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [i, j, _] = edges[e];
    const double c = weights[e] / std::sqrt(degree[i] * degree[j]);
    adj.rows[i].push_back({j, c});
    adj.rows[j].push_back({i, c});
  }
  return adj;
}

Matrix aggregate(const Adjacency& adj, const Matrix& h) {
  if (h.rows() != adj.size())
    throw Error(Errc::ShapeMismatch, kModule,
                "aggregate over " + std::to_string(adj.size()) + " nodes given " + std::to_string(h.rows()) + " rows");
  Matrix out(h.rows(), h.cols());
  for (std::size_t i = 0; i < adj.size(); ++i)
    for (const auto& [j, c] : adj.rows[i]) kernels::axpy(c, h.row(j), out.row(i));
  return out;
}

Matrix gcn_layer(const Matrix& h, const Adjacency& adj, const Matrix& w, Activation act) {
  Matrix z = aggregate(adj, matmul(h, w));
  return act == Activation::Relu ? relu(z) : z;
}

Matrix gcn_layer(const Matrix& h, const SignalGraph& g, const Matrix& w, Activation act) {
  const auto weights = g.weights();
  return gcn_layer(h, normalized_adjacency(g.node_count(), g.edges, weights), w, act);
}

std::size_t Diagnosis::predicted_type() const {
  return static_cast<std::size_t>(std::max_element(mean_type.begin(), mean_type.end()) - mean_type.begin());
}

ForwardResult forward(const SignalGraph& g, std::span<const double> edge_weights, const ModelState& state,
                      bool train_mode, std::uint64_t dropout_seed) {
  const auto& cfg = state.config;
  const auto& p = state.params;
  const std::size_t n = g.node_count();
  if (g.feature_dim() != cfg.input_dim)
    throw Error(Errc::ShapeMismatch, kModule,
                g.id + ": feature dim " + std::to_string(g.feature_dim()) + " but model expects " + std::to_string(cfg.input_dim));

  ForwardResult r;
  auto& c = r.cache;
  c.adj = normalized_adjacency(n, g.edges, edge_weights);
  c.x = Matrix(n, cfg.input_dim);
  for (std::size_t i = 0; i < n; ++i) std::copy(g.nodes[i].x.begin(), g.nodes[i].x.end(), c.x.row(i).begin());

  c.embed = matmul(c.x, p.embed_w);
  add_bias(c.embed, p.embed_b);

  c.z1 = aggregate(c.adj, matmul(c.embed, p.gcn1_w));
  add_bias(c.z1, p.gcn1_b);
  c.h1 = relu(c.z1);

  if (train_mode && cfg.dropout > 0.0) {
    c.mask = Matrix(n, cfg.gcn1_dim);
    Rng rng(dropout_seed);
    const double keep_scale = 1.0 / (1.0 - cfg.dropout);
    for (double& m : c.mask.values()) m = rng.uniform() < cfg.dropout ? 0.0 : keep_scale;
    c.d1 = c.h1;
    for (std::size_t i = 0; i < c.d1.size(); ++i) c.d1.values()[i] *= c.mask.values()[i];
  } else {
    c.d1 = c.h1;
  }

  c.z2 = aggregate(c.adj, matmul(c.d1, p.gcn2_w));
  add_bias(c.z2, p.gcn2_b);
  c.h2 = relu(c.z2);

  c.anomaly_logit = matmul(c.h2, p.anomaly_w);
  add_bias(c.anomaly_logit, p.anomaly_b);
  c.type_logits = matmul(c.h2, p.type_w);
  add_bias(c.type_logits, p.type_b);
  c.type_prob = softmax_rows(c.type_logits);

  auto& d = r.diagnosis;
  d.anomaly.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.anomaly[i] = sigmoid(c.anomaly_logit(i, 0));
  d.type_distribution = c.type_prob;

  if (cfg.has_severity_head()) {
    c.severity_z1 = matmul(c.h2, p.severity1_w);
    add_bias(c.severity_z1, p.severity1_b);
    c.severity_h1 = relu(c.severity_z1);
    c.severity_z2 = matmul(c.severity_h1, p.severity2_w);
    add_bias(c.severity_z2, p.severity2_b);
    d.severity.resize(n);
    if (cfg.severity_mode == SeverityMode::Regression) {
      for (std::size_t i = 0; i < n; ++i) d.severity[i] = std::max(0.0, c.severity_z2(i, 0));
    } else {
      c.severity_prob = softmax_rows(c.severity_z2);
      const double denom = static_cast<double>(cfg.severity_bins - 1);
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t b = 0; b < cfg.severity_bins; ++b) s += c.severity_prob(i, b) * static_cast<double>(b) / denom;
        d.severity[i] = s;
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  d.mean_anomaly = std::accumulate(d.anomaly.begin(), d.anomaly.end(), 0.0) * inv_n;
  if (!d.severity.empty()) d.mean_severity = std::accumulate(d.severity.begin(), d.severity.end(), 0.0) * inv_n;
  d.mean_type.assign(cfg.type_classes, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < cfg.type_classes; ++k) d.mean_type[k] += c.type_prob(i, k) * inv_n;
  return r;
}

LossTerms loss_terms(const ForwardResult& fwd, const SignalGraph& g, const ModelConfig& cfg) {
  const auto& c = fwd.cache;
  const std::size_t n = g.node_count();
  if (g.targets.size() != n) throw Error(Errc::ShapeMismatch, kModule, g.id + ": targets missing for some nodes");
  const double inv_n = 1.0 / static_cast<double>(n);
  LossTerms t;
  std::size_t typed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tg = g.targets[i];
    const double z = c.anomaly_logit(i, 0);
    t.anomaly += (softplus(z) - tg.anomaly * z) * inv_n;
    if (cfg.has_severity_head()) {
      if (cfg.severity_mode == SeverityMode::Regression) {
        const double e = fwd.diagnosis.severity[i] - tg.severity;
        t.severity += e * e * inv_n;
      } else {
        t.severity -= log_softmax_at(c.severity_z2.row(i), severity_bin(tg.severity, cfg.severity_bins)) * inv_n;
      }
    }
    if (tg.anomaly == 1 && tg.type) {
      t.type -= log_softmax_at(c.type_logits.row(i), static_cast<std::size_t>(*tg.type));
      ++typed;
    }
  }
  if (typed > 0) t.type /= static_cast<double>(typed);
  t.total = cfg.lambda_anomaly * t.anomaly + cfg.lambda_severity * t.severity + cfg.lambda_type * t.type;
  return t;
}

Gradients loss_and_gradients(const ForwardResult& fwd, const SignalGraph& g, const ModelState& state) {
  const auto& cfg = state.config;
  const auto& p = state.params;
  const auto& c = fwd.cache;
  const std::size_t n = g.node_count();
  const double inv_n = 1.0 / static_cast<double>(n);

  Gradients out;
  out.loss = loss_terms(fwd, g, cfg);
  auto& gr = out.grad;
  gr = p.zeros_like();

  // heads
  Matrix d_anomaly(n, 1);
  Matrix d_type(n, cfg.type_classes);
  std::size_t typed = 0;
  for (const auto& tg : g.targets) typed += (tg.anomaly == 1 && tg.type) ? 1 : 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tg = g.targets[i];
    d_anomaly(i, 0) = cfg.lambda_anomaly * (fwd.diagnosis.anomaly[i] - tg.anomaly) * inv_n;
    if (tg.anomaly == 1 && tg.type) {
      const double scale = cfg.lambda_type / static_cast<double>(typed);
      for (std::size_t k = 0; k < cfg.type_classes; ++k)
        d_type(i, k) = scale * (c.type_prob(i, k) - (k == static_cast<std::size_t>(*tg.type) ? 1.0 : 0.0));
    }
  }
  gr.anomaly_w = matmul_tn(c.h2, d_anomaly);
  gr.anomaly_b = column_sums(d_anomaly);
  gr.type_w = matmul_tn(c.h2, d_type);
  gr.type_b = column_sums(d_type);
  Matrix d_h2 = matmul_nt(d_anomaly, p.anomaly_w);
  {
    const Matrix d_h2_type = matmul_nt(d_type, p.type_w);
    kernels::axpy(1.0, d_h2_type.values(), d_h2.values());
  }

  if (cfg.has_severity_head()) {
    const std::size_t outs = p.severity2_w.cols();
    Matrix d_z2s(n, outs);
    for (std::size_t i = 0; i < n; ++i) {
      const double target = g.targets[i].severity;
      if (cfg.severity_mode == SeverityMode::Regression) {
        if (c.severity_z2(i, 0) > 0.0)
          d_z2s(i, 0) = cfg.lambda_severity * 2.0 * (fwd.diagnosis.severity[i] - target) * inv_n;
      } else {
        const std::size_t bin = severity_bin(target, cfg.severity_bins);
        for (std::size_t b = 0; b < outs; ++b)
          d_z2s(i, b) = cfg.lambda_severity * (c.severity_prob(i, b) - (b == bin ? 1.0 : 0.0)) * inv_n;
      }
    }
    gr.severity2_w = matmul_tn(c.severity_h1, d_z2s);
    gr.severity2_b = column_sums(d_z2s);
    Matrix d_z1s = matmul_nt(d_z2s, p.severity2_w);
    relu_backward(d_z1s, c.severity_z1);
    gr.severity1_w = matmul_tn(c.h2, d_z1s);
    gr.severity1_b = column_sums(d_z1s);
    if (!cfg.detach_severity) {
      const Matrix d_h2_sev = matmul_nt(d_z1s, p.severity1_w);
      kernels::axpy(1.0, d_h2_sev.values(), d_h2.values());
    }
  }

  // GCN2: z2 = A (d1 W2) + b2, A symmetric
  Matrix d_z2 = std::move(d_h2);
  relu_backward(d_z2, c.z2);
  gr.gcn2_b = column_sums(d_z2);
  const Matrix d_u2 = aggregate(c.adj, d_z2);
  gr.gcn2_w = matmul_tn(c.d1, d_u2);
  Matrix d_h1 = matmul_nt(d_u2, p.gcn2_w);
  if (!c.mask.empty())
    for (std::size_t i = 0; i < d_h1.size(); ++i) d_h1.values()[i] *= c.mask.values()[i];

  // GCN1
  Matrix d_z1 = std::move(d_h1);
  relu_backward(d_z1, c.z1);
  gr.gcn1_b = column_sums(d_z1);
  const Matrix d_u1 = aggregate(c.adj, d_z1);
  gr.gcn1_w = matmul_tn(c.embed, d_u1);
  const Matrix d_embed = matmul_nt(d_u1, p.gcn1_w);

  gr.embed_w = matmul_tn(c.x, d_embed);
  gr.embed_b = column_sums(d_embed);
  return out;
}

double edge_affinity(std::span<const double> hi, std::span<const double> hj) {
  const double ni = std::sqrt(kernels::sum_squares(hi));
  const double nj = std::sqrt(kernels::sum_squares(hj));
  // a node whose hidden units are all inactive has no direction; treat as orthogonal
  if (!(ni > 0.0) || !(nj > 0.0)) return 0.5;
  const double cosine = std::clamp(kernels::dot(hi, hj) / (ni * nj), -1.0, 1.0);
  return (1.0 + cosine) / 2.0;
}

std::vector<double> reweight_edges(const std::vector<Edge>& edges, std::span<const double> old_weights,
                                   const Matrix& h1, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) bad_config("beta: must lie in [0, 1]");
  if (old_weights.size() != edges.size())
    throw Error(Errc::ShapeMismatch, kModule, "reweight: weight count does not match edge count");
  std::vector<double> out(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double f = edge_affinity(h1.row(edges[e].i), h1.row(edges[e].j));
    out[e] = std::clamp((1.0 - beta) * old_weights[e] + beta * f, 0.0, 1.0);
  }
  return out;
}

Diagnosis predict(const SignalGraph& g, const ModelState& state) {
  std::vector<double> weights = g.weights();
  if (state.config.reweights()) {
    const std::size_t rounds = std::min(state.reweight_rounds, state.config.inference_reweight_rounds);
    for (std::size_t r = 0; r < rounds; ++r) {
      const auto fwd = forward(g, weights, state, false);
      weights = reweight_edges(g.edges, weights, fwd.cache.h1, state.config.beta);
    }
  }
  return forward(g, weights, state, false).diagnosis;
}

}  // namespace imfault::model
