#pragma once
// Shared fixtures for the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "imfault/gradcheck.hpp"
#include "imfault/model.hpp"
#include "imfault/rng.hpp"

namespace imfault::testing {

// Random connected graph: chain plus extra random edges, random targets.
inline graph::SignalGraph random_graph(std::size_t n, std::size_t d, std::uint64_t seed, double extra_edge_prob = 0.4) {
  Rng rng(seed);
  graph::SignalGraph g;
  g.id = "g" + std::to_string(seed);
  g.feature_set = d % 5 == 0 ? features::FeatureSet::Full : features::FeatureSet::TimeOnly;
  for (std::size_t i = 0; i < n; ++i) {
    features::WindowFeatures w;
    w.window_index = i;
    w.x.resize(d);
    for (double& v : w.x) v = rng.normal();
    g.nodes.push_back(std::move(w));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (j == i + 1 || rng.uniform() < extra_edge_prob) g.edges.push_back({i, j, rng.uniform(0.05, 1.0)});
  const int kind = static_cast<int>(rng.below(4));
  if (kind == 0) g.label = sim::FaultSpec::healthy();
  if (kind == 1) g.label = sim::FaultSpec::make_eccentricity(sim::EccentricityType::Dynamic, 1 + static_cast<int>(rng.below(4)));
  if (kind == 2) g.label = sim::FaultSpec::make_broken_bars(1 + static_cast<int>(rng.below(3)));
  if (kind == 3) g.label = sim::FaultSpec::make_bearing(sim::BearingSite::Ball, 1 + static_cast<int>(rng.below(3)), 60);
  g.targets.assign(n, {g.label.is_fault() ? 1 : 0, g.label.severity, g.label.type()});
  // mixed targets inside one graph exercise the type mask
  if (n > 2) g.targets[1] = {1, 0.5, sim::FaultType::BarBreakage};
  if (n > 3) g.targets[2] = {0, 0.0, std::nullopt};
  return g;
}

inline model::ModelState random_state(const model::ModelConfig& cfg) {
  auto s = model::init_state(cfg);
  // push biases off zero so every ReLU branch is exercised
  Rng rng(derive_seed(cfg.seed, "test-bias"));
  s.params.for_each([&](const char* name, Matrix& m) {
    if (std::string_view(name).ends_with("_b"))
      for (double& v : m.values()) v = rng.uniform(-0.2, 0.2);
  });
  return s;
}

struct GradReport {
  std::string worst_tensor;
  double worst_rel = 0.0;
  std::size_t tensors = 0;
};

// Compares analytic gradients of every tensor with central differences.
// With detached severity, the trunk sees only the anomaly and type terms,
// so trunk tensors are checked against that objective and head tensors
// against the full loss; otherwise everything is checked against the full loss.
inline GradReport check_gradients(const graph::SignalGraph& g, const model::ModelState& state, bool train_mode,
                                  std::uint64_t dropout_seed = 99) {
  const auto weights = g.weights();
  const auto fwd = model::forward(g, weights, state, train_mode, dropout_seed);
  const auto analytic = model::loss_and_gradients(fwd, g, state);
  const auto& cfg = state.config;

  std::vector<std::pair<std::string, Matrix>> grads;
  analytic.grad.for_each([&](const char* name, const Matrix& m) { grads.emplace_back(name, m); });

  GradReport report;
  std::size_t idx = 0;
  auto probe = state;
  probe.params.for_each([&](const char* name, Matrix& tensor) {
    const Matrix& a = grads[idx++].second;
    if (tensor.empty()) return;
    const bool head = model::Parameters::is_severity_tensor(name);
    const bool full_objective = head || !cfg.detach_severity || !cfg.has_severity_head();
    const Matrix original = tensor;
    auto objective = [&](const Matrix& x) {
      tensor = x;
      const auto f = model::forward(g, weights, probe, train_mode, dropout_seed);
      const auto t = model::loss_terms(f, g, cfg);
      tensor = original;
      return full_objective ? t.total : t.total - cfg.lambda_severity * t.severity;
    };
    const Matrix numeric = finite_diff_grad(objective, original, 1e-6);
    double scale = 0.0;
    for (double v : numeric.values()) scale = std::max(scale, std::abs(v));
    const double rel = max_abs_diff(a, numeric) / std::max(scale, 1e-7);
    ++report.tensors;
    if (rel > report.worst_rel) {
      report.worst_rel = rel;
      report.worst_tensor = name;
    }
  });
  return report;
}

inline model::ModelConfig small_config(model::Ablation a, std::size_t input_dim, std::uint64_t seed = 5) {
  model::ModelConfig c;
  c.ablation = a;
  c.input_dim = input_dim;
  c.seed = seed;
  return c;
}

}  // namespace imfault::testing
