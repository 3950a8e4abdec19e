#pragma once
// One graph per recording: nodes are windows, edges join consecutive windows
// and each node's k most similar non-adjacent windows.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "imfault/features.hpp"
#include "imfault/machine_sim.hpp"

namespace imfault::graph {

using features::FeatureSet;
using features::WindowFeatures;
using sim::FaultType;

struct NodeTarget {
  int anomaly = 0;
  double severity = 0.0;
  std::optional<FaultType> type;

  friend bool operator==(const NodeTarget&, const NodeTarget&) = default;
};

// Undirected edge, stored once with i < j; (j, i) carries the same weight.
struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct SignalGraph {
  std::string id;
  FeatureSet feature_set = FeatureSet::Full;
  std::vector<WindowFeatures> nodes;
  std::vector<Edge> edges;
  std::vector<NodeTarget> targets;
  sim::FaultSpec label;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t feature_dim() const { return nodes.empty() ? 0 : nodes.front().x.size(); }
  std::vector<double> weights() const;
};

double cosine_similarity(std::span<const double> x, std::span<const double> y);

SignalGraph build_graph(const std::vector<WindowFeatures>& windows, std::size_t k, const sim::FaultSpec& label,
                        FeatureSet set = FeatureSet::Full);

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::array<std::size_t, 10> weight_histogram{};  // ten equal bins over [0, 1]
  std::size_t min_degree = 0;
  std::size_t max_degree = 0;
  double mean_weight = 0.0;
};

GraphStats graph_stats(const SignalGraph& g);

nlohmann::json to_json(const SignalGraph& g);
SignalGraph graph_from_json(const nlohmann::json& j);

}  // namespace imfault::graph
