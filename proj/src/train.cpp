#include <algorithm>
#include <numeric>
#include <string>

#include "imfault/error.hpp"
#include "imfault/kernels.hpp"
#include "imfault/model.hpp"
#include "imfault/parallel.hpp"
#include "imfault/rng.hpp"

namespace imfault::model {

namespace {

constexpr const char* kModule = "model";

void check_dataset(const std::vector<SignalGraph>& graphs, const ModelConfig& cfg, const char* what) {
  for (const auto& g : graphs) {
    if (g.feature_set != cfg.feature_set())
      throw Error(Errc::FeatureDimMismatch, kModule,
                  std::string(what) + " graph " + g.id + " was featurized with the " + features::to_string(g.feature_set) +
                      " set but ablation " + to_string(cfg.ablation) + " expects " + features::to_string(cfg.feature_set()));
    if (g.feature_dim() != cfg.input_dim)
      throw Error(Errc::FeatureDimMismatch, kModule,
                  std::string(what) + " graph " + g.id + " has feature dim " + std::to_string(g.feature_dim()) +
                      ", model input_dim is " + std::to_string(cfg.input_dim));
  }
}

// into += alpha * g, tensor by tensor
void axpy_params(double alpha, const Parameters& g, Parameters& into) {
  std::vector<const Matrix*> src;
  g.for_each([&](const char*, const Matrix& m) { src.push_back(&m); });
  std::size_t k = 0;
  into.for_each([&](const char*, Matrix& m) {
    if (!m.empty()) kernels::axpy(alpha, src[k]->values(), m.values());
    ++k;
  });
}

bool correct(const Diagnosis& d, const sim::FaultSpec& label) {
  if (!label.is_fault()) return !d.is_anomalous();
  return d.is_anomalous() && d.predicted_type() == static_cast<std::size_t>(*label.type());
}

}  // namespace

double graph_accuracy(const std::vector<SignalGraph>& graphs, const ModelState& state) {
  if (graphs.empty()) throw Error(Errc::EmptyDataset, kModule, "accuracy over zero graphs");
  std::vector<char> hit(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) { hit[i] = correct(predict(graphs[i], state), graphs[i].label); });
  return static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(graphs.size());
}

TrainResult train(const std::vector<SignalGraph>& dataset, const ModelConfig& config,
                  const std::vector<SignalGraph>* validation) {
  config.validate();
  if (dataset.empty()) throw Error(Errc::EmptyDataset, kModule, "training split is empty");
  check_dataset(dataset, config, "training");
  if (validation != nullptr) check_dataset(*validation, config, "validation");

  TrainResult result;
  ModelState& state = result.state;
  state = init_state(config);
  state.edge_weights.reserve(dataset.size());
  for (const auto& g : dataset) state.edge_weights.push_back(g.weights());

  const std::size_t n = dataset.size();
  const std::uint64_t shuffle_seed = derive_seed(config.seed, "shuffle");
  const std::uint64_t dropout_seed = derive_seed(config.seed, "dropout");
  std::vector<std::size_t> order(n);
  std::vector<Gradients> grads(n);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(shuffle_seed, epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    LossTerms epoch_loss;
    for (std::size_t start = 0; start < n; start += config.batch) {
      const std::size_t stop = std::min(n, start + config.batch);
      // per-graph work may fan out; the reduction below runs in batch order
      parallel_for(stop - start, [&](std::size_t b) {
        const std::size_t gi = order[start + b];
        const auto fwd = forward(dataset[gi], state.edge_weights[gi], state, true,
                                 derive_seed(dropout_seed, (epoch - 1) * n + gi));
        grads[start + b] = loss_and_gradients(fwd, dataset[gi], state);
      });
      Parameters sum = state.params.zeros_like();
      for (std::size_t b = start; b < stop; ++b) {
        axpy_params(1.0, grads[b].grad, sum);
        epoch_loss.total += grads[b].loss.total;
        epoch_loss.anomaly += grads[b].loss.anomaly;
        epoch_loss.severity += grads[b].loss.severity;
        epoch_loss.type += grads[b].loss.type;
      }
      axpy_params(-config.learning_rate / static_cast<double>(stop - start), sum, state.params);
    }
    if (!state.params.all_finite())
      throw Error(Errc::NonFinite, kModule, "parameters diverged in epoch " + std::to_string(epoch));

    if (config.reweights()) {
      parallel_for(n, [&](std::size_t gi) {
        const auto fwd = forward(dataset[gi], state.edge_weights[gi], state, false);
        state.edge_weights[gi] = reweight_edges(dataset[gi].edges, state.edge_weights[gi], fwd.cache.h1, config.beta);
      });
      ++state.reweight_rounds;
    }
    state.epoch = epoch;

    const double inv = 1.0 / static_cast<double>(n);
    EpochLog log{epoch, {epoch_loss.total * inv, epoch_loss.anomaly * inv, epoch_loss.severity * inv, epoch_loss.type * inv}, {}};
    if (validation != nullptr && !validation->empty()) log.val_accuracy = graph_accuracy(*validation, state);
    result.log.push_back(log);
  }
  return result;
}

}  // namespace imfault::model
