#include "imfault/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "imfault/error.hpp"
#include "imfault/kernels.hpp"

namespace imfault::graph {

namespace {
constexpr const char* kModule = "graphbuild";
}

std::vector<double> SignalGraph::weights() const {
  std::vector<double> w(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) w[e] = edges[e].weight;
  return w;
}

double cosine_similarity(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(Errc::ShapeMismatch, kModule,
                "cosine of vectors with dimensions " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  const double nx = std::sqrt(kernels::sum_squares(x));
  const double ny = std::sqrt(kernels::sum_squares(y));
  if (!(nx > 1e-12) || !(ny > 1e-12)) throw Error(Errc::ZeroVector, kModule, "cosine similarity of a zero vector");
  const double c = kernels::dot(x, y) / (nx * ny);
  return std::clamp(c, -1.0, 1.0);
}

SignalGraph build_graph(const std::vector<WindowFeatures>& windows, std::size_t k, const sim::FaultSpec& label,
                        FeatureSet set) {
  const std::size_t n = windows.size();
  if (n < 2) throw Error(Errc::TooFewWindows, kModule, "need at least 2 windows, got " + std::to_string(n));
  SignalGraph g;
  g.id = windows.front().source;
  g.feature_set = set;
  g.nodes = windows;
  g.label = label;

  std::vector<std::vector<double>> cos(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) cos[i][j] = cos[j][i] = cosine_similarity(windows[i].x, windows[j].x);

  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i + 1 < n; ++i) pairs.insert({i, i + 1});
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < n && k > 0; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && (j > i ? j - i : i - j) > 1) cand.push_back(j);
    std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) { return cos[i][a] > cos[i][b]; });
    for (std::size_t r = 0; r < std::min(k, cand.size()); ++r) pairs.insert({std::min(i, cand[r]), std::max(i, cand[r])});
  }
  g.edges.reserve(pairs.size());
  for (const auto& [i, j] : pairs) g.edges.push_back({i, j, (1.0 + cos[i][j]) / 2.0});

  NodeTarget t;
  t.anomaly = label.is_fault() ? 1 : 0;
  t.severity = label.severity;
  t.type = label.type();
  g.targets.assign(n, t);
  return g;
}

GraphStats graph_stats(const SignalGraph& g) {
  GraphStats s;
  s.nodes = g.node_count();
  s.edges = g.edges.size();
  std::vector<std::size_t> degree(s.nodes, 0);
  double total = 0.0;
  for (const auto& e : g.edges) {
    ++degree[e.i];
    ++degree[e.j];
    const auto bin = std::min<std::size_t>(9, static_cast<std::size_t>(std::floor(e.weight * 10.0)));
    ++s.weight_histogram[bin];
    total += e.weight;
  }
  if (!degree.empty()) {
    s.min_degree = *std::min_element(degree.begin(), degree.end());
    s.max_degree = *std::max_element(degree.begin(), degree.end());
  }
  s.mean_weight = s.edges ? total / static_cast<double>(s.edges) : 0.0;
  return s;
}

nlohmann::json to_json(const SignalGraph& g) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& n : g.nodes) nodes.push_back({{"window_index", n.window_index}, {"source", n.source}, {"x", n.x}});
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back(json::array({e.i, e.j, e.weight}));
  json targets = json::array();
  for (const auto& t : g.targets) {
    json jt{{"anomaly", t.anomaly}, {"severity", t.severity}};
    jt["type"] = t.type ? json(sim::to_string(*t.type)) : json(nullptr);
    targets.push_back(std::move(jt));
  }
  json label{{"kind", sim::to_string(g.label.kind)},
             {"subtype", sim::to_string(g.label.eccentricity)},
             {"broken_bars", g.label.broken_bars},
             {"site", sim::to_string(g.label.site)},
             {"severity", g.label.severity},
             {"fv", g.label.fv}};
  return {{"id", g.id},
          {"feature_set", features::to_string(g.feature_set)},
          {"label", label},
          {"nodes", nodes},
          {"edges", edges},
          {"targets", targets}};
}

SignalGraph graph_from_json(const nlohmann::json& j) {
  SignalGraph g;
  try {
    g.id = j.at("id").get<std::string>();
    g.feature_set = features::feature_set_from_string(j.at("feature_set").get<std::string>());
    const auto& l = j.at("label");
    g.label.kind = sim::fault_kind_from_string(l.at("kind").get<std::string>());
    g.label.eccentricity = sim::eccentricity_from_string(l.at("subtype").get<std::string>());
    g.label.broken_bars = l.at("broken_bars").get<int>();
    g.label.site = sim::bearing_site_from_string(l.at("site").get<std::string>());
    g.label.severity = l.at("severity").get<double>();
    g.label.fv = l.at("fv").get<double>();
    for (const auto& n : j.at("nodes"))
      g.nodes.push_back({n.at("x").get<std::vector<double>>(), n.at("window_index").get<std::size_t>(),
                         n.at("source").get<std::string>()});
    for (const auto& e : j.at("edges"))
      g.edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
    for (const auto& t : j.at("targets")) {
      NodeTarget nt;
      nt.anomaly = t.at("anomaly").get<int>();
      nt.severity = t.at("severity").get<double>();
      if (!t.at("type").is_null()) {
        const auto name = t.at("type").get<std::string>();
        for (auto ft : {FaultType::Eccentricity, FaultType::BarBreakage, FaultType::Bearing})
          if (sim::to_string(ft) == name) nt.type = ft;
      }
      g.targets.push_back(nt);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, kModule, std::string("graph json: ") + e.what());
  }
  for (const auto& e : g.edges)
    if (e.i >= g.nodes.size() || e.j >= g.nodes.size() || e.i == e.j)
      throw Error(Errc::ParseError, kModule, "graph json: edge endpoint out of range");
  return g;
}

}  // namespace imfault::graph
