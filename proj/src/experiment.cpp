#include "imfault/error.hpp"
#include "imfault/eval.hpp"
#include "imfault/parallel.hpp"
#include "imfault/rng.hpp"

namespace imfault::eval {

namespace {

FeatureTables tabulate(const std::vector<sim::Recording>& recs, const ExperimentConfig& cfg) {
  FeatureTables t;
  t.full.resize(recs.size());
  parallel_for(recs.size(), [&](std::size_t i) {
    const auto& rec = recs[i];
    const sim::Recording clean = cfg.filter_enabled ? preprocess::filter_recording(rec, cfg.filter) : rec;
    t.full[i] = features::extract_windows(clean, cfg.window, {features::FeatureSet::Full, false});
  });
  for (const auto& r : recs) {
    t.labels.push_back(r.label);
    t.ids.push_back(r.id);
  }
  return t;
}

std::vector<model::SignalGraph> graphs_for(const FeatureTables& t, const std::vector<std::vector<features::WindowFeatures>>& tables,
                                           const features::Standardizer& st, std::size_t k, features::FeatureSet set) {
  std::vector<model::SignalGraph> out(tables.size());
  parallel_for(tables.size(), [&](std::size_t i) {
    out[i] = graph::build_graph(st.apply(tables[i]), k, t.labels[i], set);
    out[i].id = t.ids[i];
  });
  return out;
}

std::vector<std::vector<features::WindowFeatures>> select(const FeatureTables& t, features::FeatureSet set,
                                                         std::size_t channels) {
  if (set == features::FeatureSet::Full) return t.full;
  std::vector<std::vector<features::WindowFeatures>> out;
  out.reserve(t.full.size());
  for (const auto& table : t.full) out.push_back(features::select_time_only(table, channels));
  return out;
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master) { return derive_seed(master, "split"); }
std::uint64_t augment_seed(std::uint64_t master) { return derive_seed(master, "augment"); }
std::uint64_t model_seed(std::uint64_t master) { return derive_seed(master, "model"); }

Featurized featurize(const std::vector<sim::Recording>& catalog, const ExperimentConfig& cfg) {
  if (catalog.empty()) throw Error(Errc::EmptyCatalog, "eval", "no recordings to featurize");
  Featurized f;
  f.catalog_size = catalog.size();
  f.split = split_indices(catalog, cfg.ratios, split_seed(cfg.seed));
  f.channels = catalog.front().channel_names;
  f.sample_rate = catalog.front().sample_rate;
  auto pick = [&](const std::vector<std::size_t>& idx) {
    std::vector<sim::Recording> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(catalog[i]);
    return out;
  };
  auto train = pick(f.split.train);
  if (cfg.augment_copies > 0) train = preprocess::augment_dataset(train, cfg.augmentation, cfg.augment_copies, augment_seed(cfg.seed));
  f.train = tabulate(train, cfg);
  f.val = tabulate(pick(f.split.val), cfg);
  f.test = tabulate(pick(f.split.test), cfg);
  return f;
}

GraphData build_graphs(const Featurized& data, const ExperimentConfig& cfg, features::FeatureSet set) {
  const std::size_t channels = data.channels.size();
  const auto train = select(data.train, set, channels);
  const auto val = select(data.val, set, channels);
  const auto test = select(data.test, set, channels);
  GraphData g;
  g.pipeline.filter_enabled = cfg.filter_enabled;
  g.pipeline.filter = cfg.filter;
  g.pipeline.window = cfg.window;
  g.pipeline.neighbors = cfg.neighbors;
  g.pipeline.standardizer = features::Standardizer::fit(train);
  g.pipeline.channels = data.channels;
  g.pipeline.sample_rate = data.sample_rate;
  g.train = graphs_for(data.train, train, g.pipeline.standardizer, cfg.neighbors, set);
  g.val = graphs_for(data.val, val, g.pipeline.standardizer, cfg.neighbors, set);
  g.test = graphs_for(data.test, test, g.pipeline.standardizer, cfg.neighbors, set);
  return g;
}

model::ModelConfig variant_config(const ExperimentConfig& cfg, model::Ablation a, std::size_t channels) {
  model::ModelConfig m = cfg.model;
  m.ablation = a;
  m.input_dim = features::features_per_channel(m.feature_set()) * channels;
  return m;
}

AblationResult run_ablation(const std::vector<sim::Recording>& catalog, const ExperimentConfig& cfg) {
  bool families[3] = {false, false, false};
  for (const auto& r : catalog)
    if (r.label.is_fault()) families[static_cast<std::size_t>(*r.label.type())] = true;
  for (std::size_t c = 0; c < 3; ++c)
    if (!families[c]) throw Error(Errc::EmptyCatalog, "eval", "catalog has no " + kFamilies[c] + " recordings");

  const Featurized data = featurize(catalog, cfg);
  const std::size_t channels = data.channels.size();
  const GraphData full = build_graphs(data, cfg, features::FeatureSet::Full);
  const GraphData time_only = build_graphs(data, cfg, features::FeatureSet::TimeOnly);

  AblationResult out;
  const auto base = model::to_json(variant_config(cfg, model::Ablation::Full, channels));
  nlohmann::json diffs = nlohmann::json::object();
  for (auto a : kVariants) {
    const auto mc = variant_config(cfg, a, channels);
    const GraphData& g = mc.feature_set() == features::FeatureSet::Full ? full : time_only;
    auto trained = model::train(g.train, mc, &g.val);
    out.report.variants.push_back(evaluate_predictions(model::variant_name(a), a, predict_all(g.test, trained.state)));
    out.trained.push_back(std::move(trained));
    nlohmann::json diff = nlohmann::json::object();
    const auto j = model::to_json(mc);
    for (const auto& [k, v] : j.items())
      if (base.at(k) != v) diff[k] = {{"full", base.at(k)}, {"variant", v}};
    diffs[model::variant_name(a)] = diff;
  }
  out.report.header = {{"seed", cfg.seed},
                       {"split_seed", split_seed(cfg.seed)},
                       {"model_seed", cfg.model.seed},
                       {"catalog", data.catalog_size},
                       {"train", data.split.train.size()},
                       {"train_with_augmentation", data.train.full.size()},
                       {"val", data.split.val.size()},
                       {"test", data.split.test.size()},
                       {"config_diff_vs_full", diffs}};
  return out;
}

}  // namespace imfault::eval
