#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "imfault/error.hpp"
#include "imfault/eval.hpp"
#include "imfault/parallel.hpp"
#include "imfault/recording_io.hpp"
#include "imfault/rng.hpp"

namespace imfault::eval {

namespace {

constexpr const char* kModule = "eval";

[[noreturn]] void undefined(const std::string& what) { throw Error(Errc::UndefinedMetric, kModule, what); }

std::string stratum(const sim::FaultSpec& f) { return f.condition() + "|" + sim::format_double(f.severity); }

std::optional<double> try_metric(double (*fn)(const ConfusionMatrix&), const ConfusionMatrix& cm) {
  try {
    return fn(cm);
  } catch (const Error& e) {
    if (e.code() != Errc::UndefinedMetric) throw;
    return std::nullopt;
  }
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = r;
    i = j + 1;
  }
  return rank;
}

std::string cell(const std::optional<double>& v, double scale = 100.0) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v * scale);
  return buf;
}

std::string csv_value(const std::optional<double>& v, double scale) {
  return v ? sim::format_double(*v * scale) : std::string("NA");
}

}  // namespace

void SplitRatios::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0)
    throw Error(Errc::InvalidConfig, kModule, "split ratios must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9)
    throw Error(Errc::InvalidConfig, kModule, "split ratios must sum to 1");
}

SplitIndices split_indices(const std::vector<sim::Recording>& catalog, const SplitRatios& ratios, std::uint64_t seed) {
  ratios.validate();
  if (catalog.empty()) throw Error(Errc::EmptyCatalog, kModule, "cannot split an empty catalog");
  Rng rng(seed);
  struct Item {
    std::string key;
    std::uint64_t tiebreak;
    std::size_t index;
  };
  std::vector<Item> items;
  items.reserve(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) items.push_back({stratum(catalog[i].label), rng.next_u64(), i});
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    return a.key != b.key ? a.key < b.key : a.tiebreak != b.tiebreak ? a.tiebreak < b.tiebreak : a.index < b.index;
  });
  // walking strata in order and always feeding the split furthest below its
  // quota spreads every stratum across the splits in proportion
  const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
  std::array<double, 3> assigned{};
  SplitIndices out;
  std::array<std::vector<std::size_t>*, 3> dest{&out.train, &out.val, &out.test};
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::size_t best = 0;
    double best_deficit = -1e300;
    for (std::size_t s = 0; s < 3; ++s) {
      if (r[s] <= 0.0) continue;
      const double deficit = r[s] * static_cast<double>(i + 1) - assigned[s];
      if (deficit > best_deficit + 1e-12) {
        best = s;
        best_deficit = deficit;
      }
    }
    assigned[best] += 1.0;
    dest[best]->push_back(items[i].index);
  }
  for (auto* d : dest) std::sort(d->begin(), d->end());
  return out;
}

Split split(const std::vector<sim::Recording>& catalog, const SplitRatios& ratios, std::uint64_t seed) {
  const auto idx = split_indices(catalog, ratios, seed);
  Split s;
  for (auto i : idx.train) s.train.push_back(catalog[i]);
  for (auto i : idx.val) s.val.push_back(catalog[i]);
  for (auto i : idx.test) s.test.push_back(catalog[i]);
  return s;
}

void ConfusionMatrix::add(bool truth, bool predicted) {
  if (truth) (predicted ? tp : fn) += 1;
  else (predicted ? fp : tn) += 1;
}

ClassConfusion::ClassConfusion(std::size_t classes) : counts(classes, std::vector<std::size_t>(classes, 0)) {}

void ClassConfusion::add(std::size_t truth, std::size_t predicted) {
  if (truth >= classes() || predicted >= classes())
    throw Error(Errc::ShapeMismatch, kModule, "class index out of range");
  ++counts[truth][predicted];
}

std::size_t ClassConfusion::total() const {
  std::size_t t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return t;
}

ConfusionMatrix ClassConfusion::one_vs_rest(std::size_t c) const {
  ConfusionMatrix cm;
  for (std::size_t t = 0; t < classes(); ++t)
    for (std::size_t p = 0; p < classes(); ++p) {
      const std::size_t n = counts[t][p];
      if (t == c && p == c) cm.tp += n;
      else if (t == c) cm.fn += n;
      else if (p == c) cm.fp += n;
      else cm.tn += n;
    }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) undefined("accuracy of an empty confusion matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double recall(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fn == 0) undefined("recall with TP + FN = 0");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
}

double precision(const ConfusionMatrix& cm) {
  if (cm.tp + cm.fp == 0) undefined("precision with TP + FP = 0");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
}

double f1(const ConfusionMatrix& cm) {
  const double p = precision(cm);
  const double r = recall(cm);
  if (p + r == 0.0) undefined("F1 with precision + recall = 0");
  return 2.0 * p * r / (p + r);
}

Metrics metrics(const ConfusionMatrix& cm) {
  return {try_metric(accuracy, cm), try_metric(recall, cm), try_metric(f1, cm)};
}

Metrics macro_metrics(const ClassConfusion& cm) {
  Metrics m;
  const std::size_t total = cm.total();
  if (total == 0) return m;
  std::size_t diag = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) diag += cm.counts[c][c];
  m.accuracy = static_cast<double>(diag) / static_cast<double>(total);
  double rsum = 0.0, psum = 0.0;
  std::size_t rn = 0, pn = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto one = cm.one_vs_rest(c);
    if (auto r = try_metric(recall, one)) rsum += *r, ++rn;
    if (auto p = try_metric(precision, one)) psum += *p, ++pn;
  }
  if (rn > 0) m.recall = rsum / static_cast<double>(rn);
  if (rn > 0 && pn > 0) {
    const double r = rsum / static_cast<double>(rn);
    const double p = psum / static_cast<double>(pn);
    if (p + r > 0.0) m.f1 = 2.0 * p * r / (p + r);
  }
  return m;
}

std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(Errc::ShapeMismatch, kModule, "spearman needs paired samples");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<Prediction> predict_all(const std::vector<model::SignalGraph>& graphs, const model::ModelState& state) {
  std::vector<Prediction> out(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) {
    const auto d = model::predict(graphs[i], state);
    auto& p = out[i];
    p.id = graphs[i].id;
    p.label = graphs[i].label;
    p.anomaly_probability = d.mean_anomaly;
    p.anomalous = d.is_anomalous();
    p.type = d.predicted_type();
    p.type_distribution = d.mean_type;
    p.severity = d.mean_severity;
  });
  return out;
}

const FamilyReport& VariantReport::family(const std::string& name) const {
  for (const auto& f : families)
    if (f.family == name) return f;
  throw Error(Errc::InvalidSpec, kModule, "no family '" + name + "' in report");
}

std::optional<double> VariantReport::mean_f1() const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& f : families) {
    if (f.anomaly.f1) s += *f.anomaly.f1, ++n;
    if (f.type.f1) s += *f.type.f1, ++n;
  }
  if (n == 0) return std::nullopt;
  return s / static_cast<double>(n);
}

VariantReport evaluate_predictions(const std::string& variant, model::Ablation ablation,
                                   std::vector<Prediction> predictions) {
  VariantReport r;
  r.variant = variant;
  r.ablation = ablation;

  ClassConfusion types;
  std::vector<double> sev_true, sev_pred;
  for (const auto& p : predictions) {
    if (!p.label.is_fault()) continue;
    if (p.anomalous) types.add(static_cast<std::size_t>(*p.label.type()), p.type);
    if (p.severity) sev_true.push_back(p.label.severity), sev_pred.push_back(*p.severity);
  }
  r.type_overall = macro_metrics(types);
  r.severity_spearman = spearman(sev_true, sev_pred);

  for (std::size_t c = 0; c < kFamilies.size(); ++c) {
    FamilyReport f;
    f.family = kFamilies[c];
    ConfusionMatrix anomaly;
    std::vector<double> st, sp;
    for (const auto& p : predictions) {
      const bool fault = p.label.is_fault();
      if (fault && p.label.family() != f.family) continue;
      (fault ? f.faulty : f.healthy) += 1;
      anomaly.add(fault, p.anomalous);
      if (fault && p.severity) st.push_back(p.label.severity), sp.push_back(*p.severity);
    }
    f.anomaly = metrics(anomaly);
    const auto one = types.one_vs_rest(c);
    // fraction of this family's detected faults that were typed correctly
    if (one.tp + one.fn > 0) f.type.accuracy = static_cast<double>(one.tp) / static_cast<double>(one.tp + one.fn);
    f.type.recall = try_metric(recall, one);
    f.type.f1 = try_metric(f1, one);
    f.severity_spearman = spearman(st, sp);
    r.families.push_back(std::move(f));
  }
  r.predictions = std::move(predictions);
  return r;
}

const VariantReport& EvalReport::variant(model::Ablation a) const {
  for (const auto& v : variants)
    if (v.ablation == a) return v;
  throw Error(Errc::InvalidSpec, kModule, "no variant " + model::variant_name(a) + " in report");
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  for (const auto& [k, v] : header.items()) os << "# " << k << ": " << v.dump() << '\n';
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-13s %8s %8s %8s %9s %9s %9s %9s\n", "variant", "dataset", "acc%", "rec%",
                "f1%", "type_acc%", "type_rec%", "type_f1%", "spearman");
  os << line;
  for (const auto& v : variants) {
    for (const auto& f : v.families) {
      std::snprintf(line, sizeof line, "%-10s %-13s %8s %8s %8s %9s %9s %9s %9s\n", v.variant.c_str(), f.family.c_str(),
                    cell(f.anomaly.accuracy).c_str(), cell(f.anomaly.recall).c_str(), cell(f.anomaly.f1).c_str(),
                    cell(f.type.accuracy).c_str(), cell(f.type.recall).c_str(), cell(f.type.f1).c_str(),
                    cell(f.severity_spearman, 1.0).c_str());
      os << line;
    }
    std::snprintf(line, sizeof line, "%-10s %-13s %8s %8s %8s %9s %9s %9s %9s\n", v.variant.c_str(), "all", "", "", "",
                  cell(v.type_overall.accuracy).c_str(), cell(v.type_overall.recall).c_str(),
                  cell(v.type_overall.f1).c_str(), cell(v.severity_spearman, 1.0).c_str());
    os << line;
  }
  return os.str();
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "variant,dataset,metric,value\n";
  auto row = [&](const std::string& v, const std::string& d, const char* m, const std::optional<double>& x, double s) {
    os << v << ',' << d << ',' << m << ',' << csv_value(x, s) << '\n';
  };
  for (const auto& v : variants) {
    for (const auto& f : v.families) {
      row(v.variant, f.family, "accuracy", f.anomaly.accuracy, 100.0);
      row(v.variant, f.family, "recall", f.anomaly.recall, 100.0);
      row(v.variant, f.family, "f1", f.anomaly.f1, 100.0);
      row(v.variant, f.family, "type_accuracy", f.type.accuracy, 100.0);
      row(v.variant, f.family, "type_recall", f.type.recall, 100.0);
      row(v.variant, f.family, "type_f1", f.type.f1, 100.0);
      if (model::ModelConfig{.ablation = v.ablation}.has_severity_head())
        row(v.variant, f.family, "severity_spearman", f.severity_spearman, 1.0);
    }
    row(v.variant, "all", "type_accuracy", v.type_overall.accuracy, 100.0);
    row(v.variant, "all", "type_recall", v.type_overall.recall, 100.0);
    row(v.variant, "all", "type_f1", v.type_overall.f1, 100.0);
    if (model::ModelConfig{.ablation = v.ablation}.has_severity_head())
      row(v.variant, "all", "severity_spearman", v.severity_spearman, 1.0);
  }
  return os.str();
}

std::string predictions_csv(const std::vector<Prediction>& predictions) {
  std::ostringstream os;
  os << "recording_id,condition,family,true_severity,true_anomaly,pred_anomaly,anomaly_probability,true_type,pred_type,"
        "p_eccentricity,p_bar_breakage,p_bearing,pred_severity\n";
  for (const auto& p : predictions) {
    os << p.id << ',' << p.label.condition() << ',' << p.label.family() << ',' << sim::format_double(p.label.severity)
       << ',' << (p.label.is_fault() ? 1 : 0) << ',' << (p.anomalous ? 1 : 0) << ','
       << sim::format_double(p.anomaly_probability) << ','
       << (p.label.is_fault() ? sim::to_string(*p.label.type()) : std::string("none")) << ','
       << (p.anomalous ? sim::to_string(static_cast<sim::FaultType>(p.type)) : std::string("none"));
    for (double q : p.type_distribution) os << ',' << sim::format_double(q);
    os << ',' << (p.severity ? sim::format_double(*p.severity) : std::string("NA")) << '\n';
  }
  return os.str();
}

}  // namespace imfault::eval
