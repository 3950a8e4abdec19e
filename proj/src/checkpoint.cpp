#include <fstream>

#include "imfault/error.hpp"
#include "imfault/model.hpp"

namespace imfault::model {

using nlohmann::json;

namespace {

constexpr const char* kModule = "checkpoint";
constexpr const char* kFormat = "imfault-checkpoint-1";

json tensor_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix tensor_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.size()) throw Error(Errc::ParseError, kModule, "tensor data length does not match its shape");
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

json pipeline_json(const PipelineConfig& p) {
  return {{"filter_enabled", p.filter_enabled},
          {"filter", {{"cutoff", p.filter.cutoff}, {"order", p.filter.order}}},
          {"window", {{"length", p.window.length}, {"hop", p.window.hop}}},
          {"neighbors", p.neighbors},
          {"standardizer", {{"mean", p.standardizer.mean}, {"stddev", p.standardizer.stddev}}},
          {"channels", p.channels},
          {"sample_rate", p.sample_rate}};
}

PipelineConfig pipeline_from_json(const json& j) {
  PipelineConfig p;
  p.filter_enabled = j.at("filter_enabled").get<bool>();
  p.filter.cutoff = j.at("filter").at("cutoff").get<double>();
  p.filter.order = j.at("filter").at("order").get<int>();
  p.window.length = j.at("window").at("length").get<std::size_t>();
  p.window.hop = j.at("window").at("hop").get<std::size_t>();
  p.neighbors = j.at("neighbors").get<std::size_t>();
  p.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
  p.standardizer.stddev = j.at("standardizer").at("stddev").get<std::vector<double>>();
  p.channels = j.at("channels").get<std::vector<std::string>>();
  p.sample_rate = j.at("sample_rate").get<double>();
  return p;
}

}  // namespace

json to_json(const ModelConfig& c) {
  return {{"input_dim", c.input_dim},
          {"embed_dim", c.embed_dim},
          {"gcn1_dim", c.gcn1_dim},
          {"gcn2_dim", c.gcn2_dim},
          {"severity_dim", c.severity_dim},
          {"type_classes", c.type_classes},
          {"learning_rate", c.learning_rate},
          {"dropout", c.dropout},
          {"beta", c.beta},
          {"epochs", c.epochs},
          {"batch", c.batch},
          {"lambda_anomaly", c.lambda_anomaly},
          {"lambda_severity", c.lambda_severity},
          {"lambda_type", c.lambda_type},
          {"ablation", to_string(c.ablation)},
          {"severity_mode", to_string(c.severity_mode)},
          {"severity_bins", c.severity_bins},
          {"detach_severity", c.detach_severity},
          {"inference_reweight_rounds", c.inference_reweight_rounds},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("input_dim", c.input_dim);
  get("embed_dim", c.embed_dim);
  get("gcn1_dim", c.gcn1_dim);
  get("gcn2_dim", c.gcn2_dim);
  get("severity_dim", c.severity_dim);
  get("type_classes", c.type_classes);
  get("learning_rate", c.learning_rate);
  get("dropout", c.dropout);
  get("beta", c.beta);
  get("epochs", c.epochs);
  get("batch", c.batch);
  get("lambda_anomaly", c.lambda_anomaly);
  get("lambda_severity", c.lambda_severity);
  get("lambda_type", c.lambda_type);
  if (j.contains("ablation")) c.ablation = ablation_from_string(j.at("ablation").get<std::string>());
  if (j.contains("severity_mode")) c.severity_mode = severity_mode_from_string(j.at("severity_mode").get<std::string>());
  get("severity_bins", c.severity_bins);
  get("detach_severity", c.detach_severity);
  get("inference_reweight_rounds", c.inference_reweight_rounds);
  get("seed", c.seed);
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& s = ckpt.state;
  json params = json::object();
  s.params.for_each([&](const char* name, const Matrix& m) {
    if (!m.empty()) params[name] = tensor_json(m);
  });
  json doc = {{"format", kFormat},
              {"config", to_json(s.config)},
              {"dims",
               {{"input", s.config.input_dim},
                {"embed", s.config.embed_dim},
                {"gcn1", s.config.gcn1_dim},
                {"gcn2", s.config.gcn2_dim},
                {"severity", s.config.has_severity_head() ? s.config.severity_dim : 0}}},
              {"epoch", s.epoch},
              {"seed", s.config.seed},
              {"reweight_rounds", s.reweight_rounds},
              {"pipeline", pipeline_json(ckpt.pipeline)},
              {"provenance", ckpt.provenance},
              {"parameters", params},
              {"edge_weights", s.edge_weights}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, kModule, "cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw Error(Errc::IoError, kModule, "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, kModule, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, kModule, path.string() + ": " + e.what());
  }
  try {
    if (doc.at("format") != kFormat) throw Error(Errc::ParseError, kModule, path.string() + ": unknown checkpoint format");
    Checkpoint ckpt;
    auto& s = ckpt.state;
    s.config = model_config_from_json(doc.at("config"));
    s.config.validate();
    s.epoch = doc.at("epoch").get<std::size_t>();
    s.reweight_rounds = doc.at("reweight_rounds").get<std::size_t>();
    const auto& params = doc.at("parameters");
    s.params.for_each([&](const char* name, Matrix& m) {
      if (params.contains(name)) m = tensor_from_json(params.at(name));
    });
    if (s.params.embed_w.rows() != s.config.input_dim)
      throw Error(Errc::ParseError, kModule, path.string() + ": embedding shape does not match input_dim");
    s.edge_weights = doc.at("edge_weights").get<std::vector<std::vector<double>>>();
    ckpt.pipeline = pipeline_from_json(doc.at("pipeline"));
    ckpt.provenance = doc.at("provenance");
    return ckpt;
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, kModule, path.string() + ": " + e.what());
  }
}

}  // namespace imfault::model
