#pragma once
// Stratified splitting, confusion-matrix metrics, per-family evaluation and
// the four-variant ablation harness.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "imfault/machine_sim.hpp"
#include "imfault/model.hpp"
#include "imfault/preprocess.hpp"

namespace imfault::eval {

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

// Stratified by (condition, severity). Indices are sorted within each split.
SplitIndices split_indices(const std::vector<sim::Recording>& catalog, const SplitRatios& ratios, std::uint64_t seed);

struct Split {
  std::vector<sim::Recording> train, val, test;
};

Split split(const std::vector<sim::Recording>& catalog, const SplitRatios& ratios, std::uint64_t seed);

struct ConfusionMatrix {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  void add(bool truth, bool predicted);
  // Positive and negative roles exchanged.
  ConfusionMatrix swapped() const { return {tn, tp, fn, fp}; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// counts[truth][predicted]
struct ClassConfusion {
  std::vector<std::vector<std::size_t>> counts;

  explicit ClassConfusion(std::size_t classes = sim::kFaultTypeCount);
  void add(std::size_t truth, std::size_t predicted);
  std::size_t total() const;
  std::size_t classes() const { return counts.size(); }
  ConfusionMatrix one_vs_rest(std::size_t c) const;
};

// Each throws UndefinedMetric on a zero denominator.
double accuracy(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double precision(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);

// Undefined values are empty rather than zero.
struct Metrics {
  std::optional<double> accuracy, recall, f1;
};

Metrics metrics(const ConfusionMatrix& cm);
// accuracy = trace / total; recall and precision averaged over classes where
// each is defined, then combined by the harmonic mean.
Metrics macro_metrics(const ClassConfusion& cm);

// Pearson correlation of average ranks. Empty when either side is constant
// or fewer than two pairs are given.
std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y);

struct Prediction {
  std::string id;
  sim::FaultSpec label;
  double anomaly_probability = 0.0;
  bool anomalous = false;
  std::size_t type = 0;
  std::vector<double> type_distribution;
  std::optional<double> severity;
};

std::vector<Prediction> predict_all(const std::vector<model::SignalGraph>& graphs, const model::ModelState& state);

inline const std::vector<std::string> kFamilies{"eccentricity", "bar_breakage", "bearing"};

struct FamilyReport {
  std::string family;
  std::size_t faulty = 0;
  std::size_t healthy = 0;
  Metrics anomaly;
  Metrics type;
  std::optional<double> severity_spearman;
};

struct VariantReport {
  std::string variant;
  model::Ablation ablation = model::Ablation::Full;
  std::vector<FamilyReport> families;
  Metrics type_overall;
  std::optional<double> severity_spearman;  // pooled over faulty recordings
  std::vector<Prediction> predictions;

  const FamilyReport& family(const std::string& name) const;
  // Mean over families of the anomaly and type F1 values that are defined.
  std::optional<double> mean_f1() const;
};

VariantReport evaluate_predictions(const std::string& variant, model::Ablation ablation,
                                   std::vector<Prediction> predictions);

struct EvalReport {
  nlohmann::json header = nlohmann::json::object();
  std::vector<VariantReport> variants;

  const VariantReport& variant(model::Ablation a) const;
  std::string to_text() const;
  // variant,dataset,metric,value with accuracy/recall/f1 in percent.
  std::string to_csv() const;
};

std::string predictions_csv(const std::vector<Prediction>& predictions);

// Everything from recordings to graphs, shared by train, evaluate and ablate.
struct ExperimentConfig {
  bool filter_enabled = true;
  preprocess::FilterSpec filter;
  features::WindowSpec window;
  std::size_t neighbors = 4;
  preprocess::AugmentationSpec augmentation;
  std::size_t augment_copies = 0;
  SplitRatios ratios;
  model::ModelConfig model;
  std::uint64_t seed = 1;
};

// Per-module seeds derived from the master seed.
std::uint64_t split_seed(std::uint64_t master);
std::uint64_t augment_seed(std::uint64_t master);
std::uint64_t model_seed(std::uint64_t master);

struct FeatureTables {
  std::vector<std::vector<features::WindowFeatures>> full;
  std::vector<sim::FaultSpec> labels;
  std::vector<std::string> ids;
};

struct Featurized {
  SplitIndices split;
  FeatureTables train, val, test;
  std::vector<std::string> channels;
  double sample_rate = 0.0;
  std::size_t catalog_size = 0;
};

// Split, augment the training part, filter, and extract full feature tables.
Featurized featurize(const std::vector<sim::Recording>& catalog, const ExperimentConfig& cfg);

struct GraphData {
  std::vector<model::SignalGraph> train, val, test;
  model::PipelineConfig pipeline;
};

// Selects the feature set, standardizes with training statistics and builds graphs.
GraphData build_graphs(const Featurized& data, const ExperimentConfig& cfg, features::FeatureSet set);

// model config for a variant with input_dim matched to the feature set.
model::ModelConfig variant_config(const ExperimentConfig& cfg, model::Ablation a, std::size_t channels);

struct AblationResult {
  EvalReport report;
  std::vector<model::TrainResult> trained;  // in variant order
};

AblationResult run_ablation(const std::vector<sim::Recording>& catalog, const ExperimentConfig& cfg);

inline const std::vector<model::Ablation> kVariants{model::Ablation::Full, model::Ablation::NoReweight,
                                                    model::Ablation::NoSeverity, model::Ablation::NoFreqFeatures};

}  // namespace imfault::eval
