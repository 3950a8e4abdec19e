#include <fstream>
#include <set>

#include "imfault/app.hpp"
#include "imfault/error.hpp"
#include "imfault/rng.hpp"

namespace imfault::app {

using nlohmann::json;

namespace {

constexpr const char* kModule = "config";

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(Errc::InvalidConfig, kModule, path + ": " + what);
}

// Walks one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& field) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) invalid(key_path(key), "expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) invalid(key_path(key), "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.is_number_integer() && !v.is_number_unsigned()) invalid(key_path(key), "expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) invalid(key_path(key), "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) invalid(key_path(key), "expected a string");
      }
      field = v.get<T>();
    } catch (const json::exception& e) {
      invalid(key_path(key), e.what());
    }
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Section(j_.contains(key) ? j_.at(key) : empty, key_path(key));
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, _] : j_.items())
      if (!seen_.contains(k)) invalid(key_path(k), "unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
void check(const std::string& path, F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    // "field: reason" from a validator extends the path
    const std::string& d = e.detail();
    const auto colon = d.find(": ");
    if (colon != std::string::npos && colon > 0 &&
        d.find_first_not_of("abcdefghijklmnopqrstuvwxyz_") == colon)
      invalid(path + "." + d.substr(0, colon), d.substr(colon + 2));
    invalid(path, d);
  }
}

void set_path(json& doc, const std::string& dotted, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) invalid(dotted, "empty key in override");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace

RunConfig::RunConfig() {
  catalog.replicates = 3;
  experiment.seed = seed;
  experiment.model.seed = eval::model_seed(seed);
}

std::uint64_t catalog_seed(std::uint64_t master) { return derive_seed(master, "catalog"); }

json to_json(const RunConfig& c) {
  const auto& cat = c.catalog;
  const auto& ex = c.experiment;
  json loads = json::array();
  for (double l : cat.loads) loads.push_back(l);
  json slip = json::array();
  for (const auto& [load, s] : cat.slip_map.points) slip.push_back({load, s});
  json model = model::to_json(ex.model);
  model.erase("seed");
  model.erase("input_dim");
  return {{"seed", c.seed},
          {"machine",
           {{"supply_frequency", c.machine.supply_frequency},
            {"pole_pairs", c.machine.pole_pairs},
            {"rated_current", c.machine.rated_current},
            {"sample_rate", c.machine.sample_rate},
            {"duration", c.machine.duration}}},
          {"catalog",
           {{"replicates", cat.replicates},
            {"snr_db", cat.noise_snr_db ? json(*cat.noise_snr_db) : json(nullptr)},
            {"loads", loads},
            {"slip_map", slip},
            {"bearing_fv", {{"ball", cat.bearing_fv.ball}, {"inner", cat.bearing_fv.inner}, {"outer", cat.bearing_fv.outer}}},
            {"synthesis",
             {{"kappa_brb", cat.params.kappa_brb},
              {"kappa_ecc", cat.params.kappa_ecc},
              {"kappa_bear", cat.params.kappa_bear},
              {"vibration_amplitude", cat.params.vibration_amplitude},
              {"bearing_harmonics", cat.params.bearing_harmonics},
              {"bearing_decay", cat.params.bearing_decay},
              {"dynamic_depth", cat.params.dynamic_depth}}}}},
          {"filter", {{"enabled", ex.filter_enabled}, {"cutoff", ex.filter.cutoff}, {"order", ex.filter.order}}},
          {"window", {{"length", ex.window.length}, {"hop", ex.window.hop}}},
          {"graph", {{"neighbors", ex.neighbors}}},
          {"augmentation",
           {{"copies", ex.augment_copies},
            {"shift_fraction", ex.augmentation.shift_fraction},
            {"scale_min", ex.augmentation.scale_min},
            {"scale_max", ex.augmentation.scale_max},
            {"noise_fraction", ex.augmentation.noise_fraction}}},
          {"split", {{"train", ex.ratios.train}, {"val", ex.ratios.val}, {"test", ex.ratios.test}}},
          {"model", model}};
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c;
  Section root(j, "");
  root.read("seed", c.seed);

  {
    auto m = root.sub("machine");
    m.read("supply_frequency", c.machine.supply_frequency);
    m.read("pole_pairs", c.machine.pole_pairs);
    m.read("rated_current", c.machine.rated_current);
    m.read("sample_rate", c.machine.sample_rate);
    m.read("duration", c.machine.duration);
    m.finish();
    check("machine", [&] { c.machine.validate(); });
  }
  {
    auto cat = root.sub("catalog");
    cat.read("replicates", c.catalog.replicates);
    if (c.catalog.replicates < 1) invalid("catalog.replicates", "must be >= 1");
    if (cat.has("snr_db")) {
      const json& v = cat.raw("snr_db");
      if (v.is_null()) c.catalog.noise_snr_db.reset();
      else if (v.is_number()) c.catalog.noise_snr_db = v.get<double>();
      else invalid("catalog.snr_db", "expected a number or null");
    }
    if (cat.has("loads")) {
      const json& v = cat.raw("loads");
      if (!v.is_array() || v.size() != 4) invalid("catalog.loads", "expected an array of 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) {
        if (!v[i].is_number()) invalid("catalog.loads[" + std::to_string(i) + "]", "expected a number");
        c.catalog.loads[i] = v[i].get<double>();
      }
    }
    if (cat.has("slip_map")) {
      const json& v = cat.raw("slip_map");
      if (!v.is_array() || v.empty()) invalid("catalog.slip_map", "expected a non-empty array of [load, slip] pairs");
      c.catalog.slip_map.points.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& p = v[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
          invalid("catalog.slip_map[" + std::to_string(i) + "]", "expected [load, slip]");
        const double s = p[1].get<double>();
        if (!(s >= 0.0 && s < 1.0)) invalid("catalog.slip_map[" + std::to_string(i) + "]", "slip must lie in [0, 1)");
        c.catalog.slip_map.points.emplace_back(p[0].get<double>(), s);
      }
    }
    for (std::size_t i = 0; i < 4; ++i)
      check("catalog.loads[" + std::to_string(i) + "]", [&] { (void)c.catalog.slip_map.slip_for(c.catalog.loads[i]); });
    {
      auto fv = cat.sub("bearing_fv");
      fv.read("ball", c.catalog.bearing_fv.ball);
      fv.read("inner", c.catalog.bearing_fv.inner);
      fv.read("outer", c.catalog.bearing_fv.outer);
      fv.finish();
      for (auto [name, v] : {std::pair{"ball", c.catalog.bearing_fv.ball}, std::pair{"inner", c.catalog.bearing_fv.inner},
                             std::pair{"outer", c.catalog.bearing_fv.outer}})
        if (!(v > 0.0)) invalid(std::string("catalog.bearing_fv.") + name, "must be > 0");
    }
    {
      auto s = cat.sub("synthesis");
      auto& p = c.catalog.params;
      s.read("kappa_brb", p.kappa_brb);
      s.read("kappa_ecc", p.kappa_ecc);
      s.read("kappa_bear", p.kappa_bear);
      s.read("vibration_amplitude", p.vibration_amplitude);
      s.read("bearing_harmonics", p.bearing_harmonics);
      s.read("bearing_decay", p.bearing_decay);
      s.read("dynamic_depth", p.dynamic_depth);
      s.finish();
      if (p.bearing_harmonics < 1) invalid("catalog.synthesis.bearing_harmonics", "must be >= 1");
    }
    cat.finish();
  }

  auto& ex = c.experiment;
  {
    auto f = root.sub("filter");
    f.read("enabled", ex.filter_enabled);
    f.read("cutoff", ex.filter.cutoff);
    f.read("order", ex.filter.order);
    f.finish();
    check("filter", [&] { ex.filter.validate(c.machine.sample_rate); });
  }
  {
    auto w = root.sub("window");
    w.read("length", ex.window.length);
    w.read("hop", ex.window.hop);
    w.finish();
    check("window", [&] { ex.window.validate(); });
    if (features::window_count(c.machine.sample_count(), ex.window) < 2)
      invalid("window.length", "recordings must hold at least two windows");
  }
  {
    auto g = root.sub("graph");
    g.read("neighbors", ex.neighbors);
    g.finish();
  }
  {
    auto a = root.sub("augmentation");
    a.read("copies", ex.augment_copies);
    a.read("shift_fraction", ex.augmentation.shift_fraction);
    a.read("scale_min", ex.augmentation.scale_min);
    a.read("scale_max", ex.augmentation.scale_max);
    a.read("noise_fraction", ex.augmentation.noise_fraction);
    a.finish();
    check("augmentation", [&] { ex.augmentation.validate(); });
  }
  {
    auto s = root.sub("split");
    s.read("train", ex.ratios.train);
    s.read("val", ex.ratios.val);
    s.read("test", ex.ratios.test);
    s.finish();
    check("split", [&] { ex.ratios.validate(); });
  }
  {
    auto m = root.sub("model");
    auto& mc = ex.model;
    m.read("embed_dim", mc.embed_dim);
    m.read("gcn1_dim", mc.gcn1_dim);
    m.read("gcn2_dim", mc.gcn2_dim);
    m.read("severity_dim", mc.severity_dim);
    m.read("type_classes", mc.type_classes);
    m.read("learning_rate", mc.learning_rate);
    m.read("dropout", mc.dropout);
    m.read("beta", mc.beta);
    m.read("epochs", mc.epochs);
    m.read("batch", mc.batch);
    m.read("lambda_anomaly", mc.lambda_anomaly);
    m.read("lambda_severity", mc.lambda_severity);
    m.read("lambda_type", mc.lambda_type);
    std::string ablation = model::to_string(mc.ablation);
    m.read("ablation", ablation);
    check("model.ablation", [&] { mc.ablation = model::ablation_from_string(ablation); });
    std::string mode = model::to_string(mc.severity_mode);
    m.read("severity_mode", mode);
    check("model.severity_mode", [&] { mc.severity_mode = model::severity_mode_from_string(mode); });
    m.read("severity_bins", mc.severity_bins);
    m.read("detach_severity", mc.detach_severity);
    m.read("inference_reweight_rounds", mc.inference_reweight_rounds);
    m.finish();
    check("model", [&] { mc.validate(); });
  }
  root.finish();

  ex.seed = c.seed;
  ex.model.seed = eval::model_seed(c.seed);
  return c;
}

RunConfig load_run_config(const std::optional<std::filesystem::path>& path, const std::vector<std::string>& overrides,
                          std::optional<std::uint64_t> seed) {
  json doc = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(Errc::IoError, kModule, "cannot read config " + path->string());
    try {
      doc = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, kModule, path->string() + ": " + e.what());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) invalid(o, "override must look like key.path=value");
    const std::string key = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    set_path(doc, key, value);
  }
  if (seed) doc["seed"] = *seed;
  return run_config_from_json(doc);
}

}  // namespace imfault::app
