#include "imfault/features.hpp"

#include <cmath>
#include <fstream>

#include "imfault/dft.hpp"
#include "imfault/error.hpp"
#include "imfault/kernels.hpp"
#include "imfault/recording_io.hpp"

namespace imfault::features {

namespace {

constexpr const char* kModule = "features";
constexpr double kSpectralFloor = 1e-12;

void require_non_empty(std::span<const double> w, const char* what) {
  if (w.empty()) throw Error(Errc::EmptyWindow, kModule, std::string(what) + " of an empty window");
}

}  // namespace

void WindowSpec::validate() const {
  if (length < 16) throw Error(Errc::InvalidSpec, kModule, "window length must be >= 16");
  if (hop < 1 || hop > length) throw Error(Errc::InvalidSpec, kModule, "hop must lie in [1, window length]");
}

std::size_t features_per_channel(FeatureSet set) { return set == FeatureSet::Full ? 5 : 3; }

std::string to_string(FeatureSet set) { return set == FeatureSet::Full ? "full" : "time_only"; }

FeatureSet feature_set_from_string(const std::string& s) {
  if (s == "full") return FeatureSet::Full;
  if (s == "time_only") return FeatureSet::TimeOnly;
  throw Error(Errc::InvalidSpec, kModule, "unknown feature set '" + s + "'");
}

double peak_amplitude(std::span<const double> window, bool absolute) {
  require_non_empty(window, "peak");
  if (!absolute) return kernels::max_value(window);
  double m = 0.0;
  for (double v : window) m = std::max(m, std::abs(v));
  return m;
}

double rms(std::span<const double> window) {
  require_non_empty(window, "rms");
  return std::sqrt(kernels::sum_squares(window) / static_cast<double>(window.size()));
}

double variance(std::span<const double> window) {
  require_non_empty(window, "variance");
  const double n = static_cast<double>(window.size());
  const double mu = kernels::sum(window) / n;
  return kernels::sum_sq_dev(window, mu) / n;
}

SpectralFeatures spectral_features(std::span<const double> window, double sample_rate) {
  if (window.size() < 4)
    throw Error(Errc::EmptyWindow, kModule, "spectral features need >= 4 samples, got " + std::to_string(window.size()));
  const auto spectrum = dft(window, sample_rate);
  const std::size_t half = spectrum.n / 2;
  std::vector<double> power(half);
  double total = 0.0;
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = 1; k <= half; ++k) {
    const double mag = std::abs(spectrum.bins[k]);
    power[k - 1] = mag * mag;
    total += power[k - 1];
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  // relative to the DC bin so rounding residue of a constant signal never counts
  const double floor = kSpectralFloor * std::max(1.0, std::abs(spectrum.bins[0]));
  if (!(best_mag > floor))
    throw Error(Errc::NoSpectralContent, kModule, "all non-DC bins below threshold");
  if (!(total > 0.0)) throw Error(Errc::ZeroPower, kModule, "window has no non-DC spectral power");
  double h = 0.0;
  for (double p : power) {
    if (p <= 0.0) continue;
    const double q = p / total;
    h -= q * std::log(q);
  }
  return {spectrum.bin_frequency(best), std::max(0.0, h)};
}

double dominant_frequency(std::span<const double> window, double sample_rate) {
  return spectral_features(window, sample_rate).dominant_frequency;
}

double spectral_entropy(std::span<const double> window) {
  if (window.size() < 2) throw Error(Errc::ZeroPower, kModule, "window too short for a spectrum");
  const auto power = one_sided_power(window);
  double total = 0.0;
  for (std::size_t k = 1; k < power.size(); ++k) total += power[k];
  const double floor = kSpectralFloor * std::max(1.0, std::sqrt(power[0]));
  if (!(std::sqrt(total) > floor)) throw Error(Errc::ZeroPower, kModule, "window has no non-DC spectral power");
  double h = 0.0;
  for (std::size_t k = 1; k < power.size(); ++k) {
    if (power[k] <= 0.0) continue;
    const double q = power[k] / total;
    h -= q * std::log(q);
  }
  return std::max(0.0, h);
}

std::size_t window_count(std::size_t length, const WindowSpec& spec) {
  spec.validate();
  if (length < spec.length) return 0;
  return (length - spec.length) / spec.hop + 1;
}

std::vector<WindowFeatures> extract_windows(const sim::Recording& rec, const WindowSpec& spec,
                                            const ExtractOptions& options) {
  spec.validate();
  const std::size_t len = rec.length();
  if (len < spec.length)
    throw Error(Errc::RecordingTooShort, kModule,
                rec.id + ": " + std::to_string(len) + " samples < window " + std::to_string(spec.length));
  const std::size_t count = window_count(len, spec);
  const std::size_t per = features_per_channel(options.set);
  std::vector<WindowFeatures> out(count);
  for (std::size_t w = 0; w < count; ++w) {
    auto& f = out[w];
    f.window_index = w;
    f.source = rec.id;
    f.x.reserve(per * rec.channels.size());
    for (const auto& ch : rec.channels) {
      const std::span<const double> win(ch.data() + w * spec.hop, spec.length);
      f.x.push_back(peak_amplitude(win, options.absolute_peak));
      f.x.push_back(rms(win));
      f.x.push_back(variance(win));
      if (options.set == FeatureSet::Full) {
        const auto sf = spectral_features(win, rec.sample_rate);
        f.x.push_back(sf.dominant_frequency);
        f.x.push_back(sf.entropy);
      }
    }
  }
  return out;
}

std::vector<std::string> feature_names(const std::vector<std::string>& channels, FeatureSet set) {
  static const char* kNames[] = {"peak", "rms", "variance", "fdom", "entropy"};
  std::vector<std::string> out;
  for (const auto& ch : channels)
    for (std::size_t i = 0; i < features_per_channel(set); ++i) out.push_back(ch + "_" + kNames[i]);
  return out;
}

std::vector<WindowFeatures> select_time_only(const std::vector<WindowFeatures>& full, std::size_t channels) {
  std::vector<WindowFeatures> out;
  out.reserve(full.size());
  for (const auto& w : full) {
    if (w.x.size() != 5 * channels)
      throw Error(Errc::FeatureDimMismatch, kModule,
                  "expected " + std::to_string(5 * channels) + " full features, got " + std::to_string(w.x.size()));
    WindowFeatures t{{}, w.window_index, w.source};
    for (std::size_t c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < 3; ++i) t.x.push_back(w.x[5 * c + i]);
    out.push_back(std::move(t));
  }
  return out;
}

Standardizer Standardizer::fit(const std::vector<std::vector<WindowFeatures>>& tables) {
  Standardizer s;
  std::size_t count = 0;
  for (const auto& t : tables) {
    for (const auto& w : t) {
      if (s.mean.empty()) {
        s.mean.assign(w.x.size(), 0.0);
        s.stddev.assign(w.x.size(), 0.0);
      }
      if (w.x.size() != s.mean.size())
        throw Error(Errc::FeatureDimMismatch, kModule, "mixed feature dimensions in standardizer fit");
      for (std::size_t i = 0; i < w.x.size(); ++i) s.mean[i] += w.x[i];
      ++count;
    }
  }
  if (count == 0) throw Error(Errc::EmptyDataset, kModule, "no windows to fit the standardizer on");
  for (double& m : s.mean) m /= static_cast<double>(count);
  for (const auto& t : tables)
    for (const auto& w : t)
      for (std::size_t i = 0; i < w.x.size(); ++i) {
        const double d = w.x[i] - s.mean[i];
        s.stddev[i] += d * d;
      }
  for (double& v : s.stddev) {
    v = std::sqrt(v / static_cast<double>(count));
    // constant columns pass through centred
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

void Standardizer::apply(WindowFeatures& w) const {
  if (w.x.size() != mean.size())
    throw Error(Errc::FeatureDimMismatch, kModule,
                "standardizer expects " + std::to_string(mean.size()) + " features, got " + std::to_string(w.x.size()));
  for (std::size_t i = 0; i < w.x.size(); ++i) w.x[i] = (w.x[i] - mean[i]) / stddev[i];
}

std::vector<WindowFeatures> Standardizer::apply(std::vector<WindowFeatures> ws) const {
  for (auto& w : ws) apply(w);
  return ws;
}

void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<WindowFeatures>>& tables) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, kModule, "cannot write " + path.string());
  out << "recording_id,window_index";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto& t : tables)
    for (const auto& w : t) {
      out << w.source << ',' << w.window_index;
      for (double v : w.x) out << ',' << sim::format_double(v);
      out << '\n';
    }
  if (!out) throw Error(Errc::IoError, kModule, "write failed for " + path.string());
}

}  // namespace imfault::features
