#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "imfault/error.hpp"
#include "imfault/graph.hpp"
#include "imfault/rng.hpp"

using namespace imfault;
using namespace imfault::graph;

namespace {

std::vector<WindowFeatures> random_windows(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<WindowFeatures> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i].window_index = i;
    w[i].source = "r";
    w[i].x.resize(d);
    for (double& v : w[i].x) v = rng.normal();
  }
  return w;
}

std::map<std::pair<std::size_t, std::size_t>, double> edge_map(const SignalGraph& g) {
  std::map<std::pair<std::size_t, std::size_t>, double> m;
  for (const auto& e : g.edges) m[{e.i, e.j}] = e.weight;
  return m;
}

std::vector<std::size_t> degrees(const SignalGraph& g) {
  std::vector<std::size_t> d(g.node_count(), 0);
  for (const auto& e : g.edges) ++d[e.i], ++d[e.j];
  return d;
}

}  // namespace

TEST_CASE("cosine similarity") {
  const std::vector<double> x{1, 2, 3};
  CHECK(cosine_similarity(x, x) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == 0.0);
  CHECK(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 1}) == doctest::Approx(1.0 / std::sqrt(2.0)));
  try {
    cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 1});
    FAIL("expected ZeroVector");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ZeroVector);
  }
  CHECK_THROWS_AS(cosine_similarity(std::vector<double>{1}, std::vector<double>{1, 1}), Error);
}

TEST_CASE("minimal graph") {
  const auto w = random_windows(2, 4, 1);
  const auto g = build_graph(w, 0, sim::FaultSpec::healthy());
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].i == 0);
  CHECK(g.edges[0].j == 1);
  CHECK(g.edges[0].weight == (1.0 + cosine_similarity(w[0].x, w[1].x)) / 2.0);
  const auto s = graph_stats(g);
  CHECK(s.nodes == 2);
  CHECK(s.edges == 1);
}

TEST_CASE("identical windows give unit weights") {
  std::vector<WindowFeatures> w(5, WindowFeatures{{1.0, -2.0, 0.5}, 0, "r"});
  const auto g = build_graph(w, 2, sim::FaultSpec::healthy());
  for (const auto& e : g.edges) CHECK(e.weight == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("degree bounds and chain") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = build_graph(random_windows(6, 5, seed), 2, sim::FaultSpec::make_broken_bars(1));
    const auto em = edge_map(g);
    for (std::size_t i = 0; i + 1 < 6; ++i) CHECK(em.contains({i, i + 1}));
    for (auto d : degrees(g)) {
      CHECK(d >= 1);
      CHECK(d <= 2 + 2 * 2);
    }
    for (const auto& e : g.edges) {
      CHECK(e.i < e.j);
      CHECK(e.weight >= 0.0);
      CHECK(e.weight <= 1.0);
    }
  }
}

TEST_CASE("path graph when k = 0") {
  for (std::size_t n = 2; n <= 12; ++n) CHECK(build_graph(random_windows(n, 3, n), 0, {}).edges.size() == n - 1);
}

TEST_CASE("knn edges match a brute-force construction") {
  const std::size_t n = 9, k = 3;
  const auto w = random_windows(n, 6, 77);
  const auto g = build_graph(w, k, {});
  std::map<std::pair<std::size_t, std::size_t>, double> expect;
  for (std::size_t i = 0; i + 1 < n; ++i) expect[{i, i + 1}] = (1 + cosine_similarity(w[i].x, w[i + 1].x)) / 2;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && (j > i ? j - i : i - j) > 1) cand.push_back({cosine_similarity(w[i].x, w[j].x), j});
    std::stable_sort(cand.begin(), cand.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t t = 0; t < std::min(k, cand.size()); ++t) {
      const auto j = cand[t].second;
      expect[{std::min(i, j), std::max(i, j)}] = (1 + cand[t].first) / 2;
    }
  }
  const auto got = edge_map(g);
  CHECK(got.size() == expect.size());
  for (const auto& [key, v] : expect) {
    REQUIRE(got.contains(key));
    CHECK(got.at(key) == doctest::Approx(v).epsilon(1e-15));
  }
}

TEST_CASE("weights are invariant to feature permutation and scaling") {
  auto w = random_windows(7, 5, 3);
  const auto g = build_graph(w, 2, {});
  auto p = w;
  for (auto& x : p) {
    std::reverse(x.x.begin(), x.x.end());
    for (double& v : x.x) v *= 3.5;
  }
  const auto h = build_graph(p, 2, {});
  REQUIRE(g.edges.size() == h.edges.size());
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    CHECK(g.edges[e].i == h.edges[e].i);
    CHECK(g.edges[e].j == h.edges[e].j);
    CHECK(g.edges[e].weight == doctest::Approx(h.edges[e].weight).epsilon(1e-14));
  }
}

TEST_CASE("targets broadcast the label") {
  const auto label = sim::FaultSpec::make_bearing(sim::BearingSite::Inner, 2, 120);
  const auto g = build_graph(random_windows(4, 3, 5), 1, label);
  REQUIRE(g.targets.size() == 4);
  for (const auto& t : g.targets) {
    CHECK(t.anomaly == 1);
    CHECK(t.severity == label.severity);
    CHECK(t.type == sim::FaultType::Bearing);
  }
  const auto h = build_graph(random_windows(4, 3, 5), 1, sim::FaultSpec::healthy());
  CHECK(h.targets[0].anomaly == 0);
  CHECK_FALSE(h.targets[0].type.has_value());
}

TEST_CASE("too few windows") {
  try {
    build_graph(random_windows(1, 3, 1), 2, {});
    FAIL("expected TooFewWindows");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::TooFewWindows);
  }
}

TEST_CASE("stats histogram accounts for every edge") {
  const auto g = build_graph(random_windows(10, 4, 9), 3, {});
  const auto s = graph_stats(g);
  std::size_t total = 0;
  for (auto c : s.weight_histogram) total += c;
  CHECK(total == s.edges);
  CHECK(s.min_degree >= 1);
  CHECK(s.max_degree <= 2 + 2 * 3);
}

TEST_CASE("json round trip is bit exact") {
  const auto g = build_graph(random_windows(6, 4, 21), 2, sim::FaultSpec::make_eccentricity(sim::EccentricityType::Mixed, 3));
  const auto text = to_json(g).dump();
  const auto back = graph_from_json(nlohmann::json::parse(text));
  CHECK(back.edges == g.edges);
  CHECK(back.targets == g.targets);
  CHECK(back.label == g.label);
  REQUIRE(back.nodes.size() == g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) CHECK(back.nodes[i].x == g.nodes[i].x);
  CHECK_THROWS_AS(graph_from_json(nlohmann::json::parse("{\"nodes\": 3}")), Error);
}
