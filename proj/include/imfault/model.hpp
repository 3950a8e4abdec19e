#pragma once
// GNN-ASE: linear node embedding, two weighted GCN layers, per-epoch dynamic
// edge reweighting, and anomaly / severity / fault-type heads, trained with
// hand-written reverse-mode gradients.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "imfault/features.hpp"
#include "imfault/graph.hpp"
#include "imfault/matrix.hpp"
#include "imfault/preprocess.hpp"

namespace imfault::model {

using graph::Edge;
using graph::SignalGraph;

enum class Ablation { Full, NoReweight, NoSeverity, NoFreqFeatures };
enum class SeverityMode { Regression, Bins };
enum class Activation { Identity, Relu };

std::string to_string(Ablation a);
Ablation ablation_from_string(const std::string& s);
// "GNN-ASE", "GNN-ASE@1", "GNN-ASE@2", "GNN-ASE@3"
std::string variant_name(Ablation a);
std::string to_string(SeverityMode m);
SeverityMode severity_mode_from_string(const std::string& s);

struct ModelConfig {
  std::size_t input_dim = 20;
  std::size_t embed_dim = 128;
  std::size_t gcn1_dim = 64;
  std::size_t gcn2_dim = 64;
  std::size_t severity_dim = 32;
  std::size_t type_classes = 3;
  double learning_rate = 0.01;
  double dropout = 0.5;
  double beta = 0.3;
  std::size_t epochs = 400;
  std::size_t batch = 4;
  double lambda_anomaly = 1.0;
  double lambda_severity = 1.0;
  double lambda_type = 1.0;
  Ablation ablation = Ablation::Full;
  // Regression: scalar ReLU output + MSE. Bins: softmax over severity bins + CE,
  // score is the expected bin centre.
  SeverityMode severity_mode = SeverityMode::Regression;
  std::size_t severity_bins = 5;
  // Severity loss trains only the severity head; the shared trunk sees the
  // anomaly and type losses. Keeps anomaly/type outputs independent of
  // whether the head exists.
  bool detach_severity = true;
  // Upper bound on reweighting rounds replayed on an unseen graph.
  std::size_t inference_reweight_rounds = 16;
  std::uint64_t seed = 1;

  bool has_severity_head() const { return ablation != Ablation::NoSeverity; }
  bool reweights() const { return ablation != Ablation::NoReweight; }
  features::FeatureSet feature_set() const {
    return ablation == Ablation::NoFreqFeatures ? features::FeatureSet::TimeOnly : features::FeatureSet::Full;
  }
  void validate() const;
};

struct Parameters {
  Matrix embed_w, embed_b;
  Matrix gcn1_w, gcn1_b;
  Matrix gcn2_w, gcn2_b;
  Matrix anomaly_w, anomaly_b;
  Matrix type_w, type_b;
  Matrix severity1_w, severity1_b;
  Matrix severity2_w, severity2_b;

  template <typename F>
  void for_each(F&& f) {
    f("embed_w", embed_w), f("embed_b", embed_b), f("gcn1_w", gcn1_w), f("gcn1_b", gcn1_b);
    f("gcn2_w", gcn2_w), f("gcn2_b", gcn2_b), f("anomaly_w", anomaly_w), f("anomaly_b", anomaly_b);
    f("type_w", type_w), f("type_b", type_b), f("severity1_w", severity1_w), f("severity1_b", severity1_b);
    f("severity2_w", severity2_w), f("severity2_b", severity2_b);
  }
  template <typename F>
  void for_each(F&& f) const {
    const_cast<Parameters*>(this)->for_each([&](const char* name, Matrix& m) { f(name, static_cast<const Matrix&>(m)); });
  }

  Parameters zeros_like() const;
  bool all_finite() const;
  static bool is_severity_tensor(std::string_view name);
};

struct ModelState {
  ModelConfig config;
  Parameters params;
  std::size_t epoch = 0;
  std::size_t reweight_rounds = 0;
  // current edge weights of each training graph, in dataset order
  std::vector<std::vector<double>> edge_weights;
};

ModelState init_state(const ModelConfig& config);

// Row i lists (j, w_ij / sqrt(d_i d_j)) over N(i) plus a unit self-loop;
// d_i is the weighted degree including the self-loop.
struct Adjacency {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
  std::size_t size() const { return rows.size(); }
};

Adjacency normalized_adjacency(std::size_t nodes, const std::vector<Edge>& edges, std::span<const double> weights);
// out_i = sum_j A_ij h_j
Matrix aggregate(const Adjacency& adj, const Matrix& h);

Matrix gcn_layer(const Matrix& h, const Adjacency& adj, const Matrix& w, Activation act);
Matrix gcn_layer(const Matrix& h, const SignalGraph& g, const Matrix& w, Activation act);

struct Diagnosis {
  std::vector<double> anomaly;        // per node probability
  std::vector<double> severity;       // per node score, empty without the head
  Matrix type_distribution;           // nodes x classes, rows sum to 1
  double mean_anomaly = 0.0;
  std::optional<double> mean_severity;
  std::vector<double> mean_type;

  bool is_anomalous() const { return mean_anomaly > 0.5; }
  std::size_t predicted_type() const;
};

struct ForwardCache {
  Adjacency adj;
  Matrix x, embed;
  Matrix z1, h1, mask, d1;
  Matrix z2, h2;
  Matrix anomaly_logit, type_logits, type_prob;
  Matrix severity_z1, severity_h1, severity_z2, severity_prob;
};

struct ForwardResult {
  Diagnosis diagnosis;
  ForwardCache cache;
};

ForwardResult forward(const SignalGraph& g, std::span<const double> edge_weights, const ModelState& state,
                      bool train_mode, std::uint64_t dropout_seed = 0);

struct LossTerms {
  double total = 0.0;
  double anomaly = 0.0;
  double severity = 0.0;
  double type = 0.0;
};

LossTerms loss_terms(const ForwardResult& fwd, const SignalGraph& g, const ModelConfig& config);

struct Gradients {
  Parameters grad;
  LossTerms loss;
};

Gradients loss_and_gradients(const ForwardResult& fwd, const SignalGraph& g, const ModelState& state);

// w_new = (1 - beta) w_old + beta f, f = (1 + cos(h1_i, h1_j)) / 2, clamped to [0, 1].
std::vector<double> reweight_edges(const std::vector<Edge>& edges, std::span<const double> old_weights,
                                   const Matrix& h1, double beta);
double edge_affinity(std::span<const double> hi, std::span<const double> hj);

// Eval-mode prediction on a graph that was not part of training: replays
// min(rounds trained, inference cap) reweighting rounds from its initial weights.
Diagnosis predict(const SignalGraph& g, const ModelState& state);

struct EpochLog {
  std::size_t epoch = 0;
  LossTerms train_loss;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  ModelState state;
  std::vector<EpochLog> log;
};

TrainResult train(const std::vector<SignalGraph>& dataset, const ModelConfig& config,
                  const std::vector<SignalGraph>* validation = nullptr);

double graph_accuracy(const std::vector<SignalGraph>& graphs, const ModelState& state);

// Everything diagnose needs to turn a raw recording into model input.
struct PipelineConfig {
  bool filter_enabled = true;
  preprocess::FilterSpec filter;
  features::WindowSpec window;
  std::size_t neighbors = 4;
  features::Standardizer standardizer;
  std::vector<std::string> channels;
  double sample_rate = 0.0;
};

struct Checkpoint {
  ModelState state;
  PipelineConfig pipeline;
  nlohmann::json provenance = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);
nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

SignalGraph graph_for_recording(const sim::Recording& rec, const PipelineConfig& pipeline, features::FeatureSet set);
Diagnosis diagnose(const sim::Recording& rec, const Checkpoint& ckpt);

}  // namespace imfault::model
