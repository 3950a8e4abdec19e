#include <fstream>

#include "imfault/app.hpp"
#include "imfault/error.hpp"
#include "imfault/recording_io.hpp"

namespace imfault::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kModule = "cli";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, kModule, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::IoError, kModule, "write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) return;
  const fs::path parent = dir.parent_path();
  if (!parent.empty() && !fs::exists(parent))
    throw Error(Errc::IoError, kModule, "parent directory does not exist: " + parent.string());
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, kModule, "cannot create " + dir.string() + ": " + ec.message());
}

void echo_config(const fs::path& dir, const RunConfig& c) {
  write_text(dir / "resolved_config.json", to_json(c).dump(2) + "\n");
}

std::string train_log_csv(const std::vector<model::EpochLog>& log) {
  std::string s = "epoch,train_loss,anomaly_loss,severity_loss,type_loss,val_accuracy\n";
  for (const auto& e : log) {
    s += std::to_string(e.epoch) + ',' + sim::format_double(e.train_loss.total) + ',' +
         sim::format_double(e.train_loss.anomaly) + ',' + sim::format_double(e.train_loss.severity) + ',' +
         sim::format_double(e.train_loss.type) + ',' + (e.val_accuracy ? sim::format_double(*e.val_accuracy) : "NA") +
         '\n';
  }
  return s;
}

}  // namespace

void cmd_simulate(const CommandOptions& opt, const fs::path& out_dir, std::ostream& log) {
  const auto& c = opt.config;
  const auto catalog = sim::generate_catalog(c.machine, catalog_seed(c.seed), c.catalog);
  sim::write_dataset(out_dir, c.machine, catalog);
  echo_config(out_dir, c);
  if (!opt.quiet) {
    log << "wrote " << catalog.size() << " recordings to " << out_dir.string() << "\n";
    for (const auto& [condition, n] : sim::condition_counts(catalog)) log << "  " << condition << ": " << n << "\n";
  }
}

void cmd_train(const CommandOptions& opt, const fs::path& dataset_dir, const fs::path& checkpoint_out,
               std::ostream& log) {
  const auto& c = opt.config;
  const auto& ex = c.experiment;
  const fs::path dir = checkpoint_out.parent_path();
  ensure_dir(dir);
  const auto ds = sim::read_dataset(dataset_dir);
  const auto data = eval::featurize(ds.recordings, ex);
  const auto mc = eval::variant_config(ex, ex.model.ablation, data.channels.size());
  const auto graphs = eval::build_graphs(data, ex, mc.feature_set());
  if (!opt.quiet)
    log << "training " << model::variant_name(mc.ablation) << " on " << graphs.train.size() << " graphs ("
        << graphs.val.size() << " val, " << graphs.test.size() << " test held out), " << mc.epochs << " epochs\n";
  auto result = model::train(graphs.train, mc, &graphs.val);

  model::Checkpoint ckpt;
  ckpt.state = std::move(result.state);
  ckpt.pipeline = graphs.pipeline;
  ckpt.provenance = {{"seed", c.seed},
                     {"split_seed", eval::split_seed(c.seed)},
                     {"split", {{"train", ex.ratios.train}, {"val", ex.ratios.val}, {"test", ex.ratios.test}}},
                     {"catalog", data.catalog_size},
                     {"train", data.split.train.size()},
                     {"val", data.split.val.size()},
                     {"test", data.split.test.size()}};
  model::save_checkpoint(checkpoint_out, ckpt);
  write_text(dir.empty() ? fs::path("train_log.csv") : dir / "train_log.csv", train_log_csv(result.log));
  echo_config(dir.empty() ? fs::path(".") : dir, c);
  if (!opt.quiet && !result.log.empty()) {
    const auto& last = result.log.back();
    log << "final train loss " << last.train_loss.total;
    if (last.val_accuracy) log << ", val accuracy " << *last.val_accuracy;
    log << "\n";
  }
}

void cmd_evaluate(const CommandOptions& opt, const fs::path& checkpoint, const fs::path& dataset_dir,
                  const fs::path& out_dir, std::ostream& log) {
  const auto ckpt = model::load_checkpoint(checkpoint);
  const auto ds = sim::read_dataset(dataset_dir);
  eval::SplitRatios ratios;
  std::uint64_t seed = 0;
  try {
    const auto& p = ckpt.provenance;
    ratios = {p.at("split").at("train").get<double>(), p.at("split").at("val").get<double>(),
              p.at("split").at("test").get<double>()};
    seed = p.at("split_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, kModule, checkpoint.string() + ": provenance lacks the split: " + e.what());
  }
  const auto idx = eval::split_indices(ds.recordings, ratios, seed);
  const auto set = ckpt.state.config.feature_set();
  std::vector<model::SignalGraph> test;
  for (auto i : idx.test) {
    auto g = model::graph_for_recording(ds.recordings[i], ckpt.pipeline, set);
    if (g.feature_dim() != ckpt.state.config.input_dim)
      throw Error(Errc::FeatureDimMismatch, kModule,
                  ds.recordings[i].id + ": dataset yields " + std::to_string(g.feature_dim()) +
                      " features per window, checkpoint expects " + std::to_string(ckpt.state.config.input_dim));
    g.id = ds.recordings[i].id;
    test.push_back(std::move(g));
  }
  if (test.empty()) throw Error(Errc::EmptyDataset, kModule, "test split is empty");

  ensure_dir(out_dir);
  eval::EvalReport report;
  const auto ablation = ckpt.state.config.ablation;
  report.variants.push_back(
      eval::evaluate_predictions(model::variant_name(ablation), ablation, eval::predict_all(test, ckpt.state)));
  report.header = {{"seed", ckpt.provenance.value("seed", json(nullptr))},
                   {"split_seed", seed},
                   {"model_seed", ckpt.state.config.seed},
                   {"test", test.size()}};
  write_text(out_dir / "report.txt", report.to_text());
  write_text(out_dir / "report.csv", report.to_csv());
  write_text(out_dir / "predictions.csv", eval::predictions_csv(report.variants.front().predictions));
  echo_config(out_dir, opt.config);
  if (!opt.quiet) log << report.to_text();
}

json diagnosis_json(const std::string& recording_id, const model::Diagnosis& d, std::size_t windows) {
  json types = json::object();
  for (std::size_t k = 0; k < d.mean_type.size(); ++k)
    types[sim::to_string(static_cast<sim::FaultType>(k))] = d.mean_type[k];
  const bool faulty = d.is_anomalous();
  return {{"recording", recording_id},
          {"windows", windows},
          {"anomaly_probability", d.mean_anomaly},
          {"severity_score", d.mean_severity ? json(*d.mean_severity) : json(nullptr)},
          {"type_distribution", types},
          {"predicted_type", faulty ? json(sim::to_string(static_cast<sim::FaultType>(d.predicted_type()))) : json(nullptr)},
          {"decision", faulty ? "faulty" : "healthy"},
          {"node_anomaly_probability", d.anomaly}};
}

void cmd_diagnose(const fs::path& checkpoint, const fs::path& recording, std::ostream& out) {
  const auto ckpt = model::load_checkpoint(checkpoint);
  const auto rec = sim::read_recording_csv(recording);
  const auto d = model::diagnose(rec, ckpt);
  out << diagnosis_json(rec.id, d, d.anomaly.size()).dump(2) << "\n";
}

void cmd_ablate(const CommandOptions& opt, const fs::path& dataset_dir, const fs::path& out_dir, std::ostream& log) {
  ensure_dir(out_dir);
  const auto ds = sim::read_dataset(dataset_dir);
  const auto result = eval::run_ablation(ds.recordings, opt.config.experiment);
  write_text(out_dir / "ablation_report.txt", result.report.to_text());
  write_text(out_dir / "ablation_report.csv", result.report.to_csv());
  for (const auto& v : result.report.variants)
    write_text(out_dir / ("predictions_" + model::to_string(v.ablation) + ".csv"), eval::predictions_csv(v.predictions));
  echo_config(out_dir, opt.config);
  if (!opt.quiet) log << result.report.to_text();
}

}  // namespace imfault::app
