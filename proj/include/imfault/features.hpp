#pragma once
// Per-window time and frequency features: peak, RMS, variance, dominant
// frequency and spectral entropy, concatenated over channels.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "imfault/machine_sim.hpp"

namespace imfault::features {

struct WindowSpec {
  std::size_t length = 2048;
  std::size_t hop = 1024;

  void validate() const;
};

enum class FeatureSet { Full, TimeOnly };

std::size_t features_per_channel(FeatureSet set);
std::string to_string(FeatureSet set);
FeatureSet feature_set_from_string(const std::string& s);

struct WindowFeatures {
  std::vector<double> x;
  std::size_t window_index = 0;
  std::string source;
};

// Literal maximum sample (signed). absolute=true takes max |S(t)| instead.
double peak_amplitude(std::span<const double> window, bool absolute = false);
double rms(std::span<const double> window);
// Population variance (divides by T).
double variance(std::span<const double> window);
// Frequency of the largest one-sided bin, DC excluded, ties to the lowest.
double dominant_frequency(std::span<const double> window, double sample_rate);
// Shannon entropy (nats) of the normalized one-sided non-DC power.
double spectral_entropy(std::span<const double> window);

struct SpectralFeatures {
  double dominant_frequency;
  double entropy;
};
// Both spectral features from one transform.
SpectralFeatures spectral_features(std::span<const double> window, double sample_rate);

std::size_t window_count(std::size_t length, const WindowSpec& spec);

struct ExtractOptions {
  FeatureSet set = FeatureSet::Full;
  bool absolute_peak = false;
};

std::vector<WindowFeatures> extract_windows(const sim::Recording& rec, const WindowSpec& spec,
                                            const ExtractOptions& options = {});

// "<channel>_<feature>" in vector order.
std::vector<std::string> feature_names(const std::vector<std::string>& channels, FeatureSet set);

// Keeps the time-domain columns of full-set vectors.
std::vector<WindowFeatures> select_time_only(const std::vector<WindowFeatures>& full, std::size_t channels);

// Per-dimension zero-mean unit-variance scaling.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const std::vector<std::vector<WindowFeatures>>& tables);
  void apply(WindowFeatures& w) const;
  std::vector<WindowFeatures> apply(std::vector<WindowFeatures> ws) const;
};

// recording_id,window_index,<feature names...>
void write_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const std::vector<std::vector<WindowFeatures>>& tables);

}  // namespace imfault::features
