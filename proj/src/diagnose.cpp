#include <cmath>

#include "imfault/error.hpp"
#include "imfault/model.hpp"

namespace imfault::model {

SignalGraph graph_for_recording(const sim::Recording& rec, const PipelineConfig& pipeline, features::FeatureSet set) {
  if (!pipeline.channels.empty() && rec.channel_names != pipeline.channels) {
    std::string got, want;
    for (const auto& c : rec.channel_names) got += (got.empty() ? "" : ",") + c;
    for (const auto& c : pipeline.channels) want += (want.empty() ? "" : ",") + c;
    throw Error(Errc::ChannelMismatch, "diagnose", rec.id + ": channels [" + got + "] but model expects [" + want + "]");
  }
  if (pipeline.sample_rate > 0.0 && std::abs(rec.sample_rate - pipeline.sample_rate) > 1e-6 * pipeline.sample_rate)
    throw Error(Errc::ChannelMismatch, "diagnose",
                rec.id + ": sample rate " + std::to_string(rec.sample_rate) + " Hz but model expects " +
                    std::to_string(pipeline.sample_rate) + " Hz");
  const sim::Recording clean = pipeline.filter_enabled ? preprocess::filter_recording(rec, pipeline.filter) : rec;
  auto windows = features::extract_windows(clean, pipeline.window, {set, false});
  if (!pipeline.standardizer.mean.empty()) windows = pipeline.standardizer.apply(std::move(windows));
  return graph::build_graph(windows, pipeline.neighbors, rec.label, set);
}

Diagnosis diagnose(const sim::Recording& rec, const Checkpoint& ckpt) {
  const auto g = graph_for_recording(rec, ckpt.pipeline, ckpt.state.config.feature_set());
  if (g.feature_dim() != ckpt.state.config.input_dim)
    throw Error(Errc::FeatureDimMismatch, "diagnose",
                rec.id + ": feature dim " + std::to_string(g.feature_dim()) + " but model expects " +
                    std::to_string(ckpt.state.config.input_dim));
  return predict(g, ckpt.state);
}

}  // namespace imfault::model
