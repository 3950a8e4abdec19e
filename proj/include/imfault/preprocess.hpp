#pragma once
// Zero-phase Butterworth cleaning and training-set augmentation.

#include <cstdint>
#include <span>
#include <vector>

#include "imfault/machine_sim.hpp"

namespace imfault::preprocess {

struct FilterSpec {
  double cutoff = 1000.0;  // Hz
  int order = 4;

  void validate(double sample_rate) const;
};

// |H(f)| = 1 / sqrt(1 + (f/f_c)^(2n))
double butterworth_gain(double freq, const FilterSpec& spec);

// Bin-wise |H| applied to the DFT, then inverse DFT. Output length == input length.
std::vector<double> butterworth_filter(std::span<const double> signal, double sample_rate, const FilterSpec& spec);

// out[i] = in[(i + shift) mod N]
std::vector<double> time_shift(std::span<const double> signal, long shift);
std::vector<double> amplitude_scale(std::span<const double> signal, double alpha);
std::vector<double> add_noise(std::span<const double> signal, double sigma, std::uint64_t seed);

struct AugmentationSpec {
  double shift_fraction = 0.1;  // |dt| uniform up to this fraction of the length
  double scale_min = 0.8;
  double scale_max = 1.2;
  double noise_fraction = 0.01;  // sigma relative to channel RMS

  void validate() const;
};

sim::Recording filter_recording(const sim::Recording& rec, const FilterSpec& spec);

// Originals first, then `copies` variants per source in source order. Every
// channel of a variant shares the same shift and scale.
std::vector<sim::Recording> augment_dataset(const std::vector<sim::Recording>& recordings,
                                            const AugmentationSpec& spec, std::size_t copies,
                                            std::uint64_t seed);

}  // namespace imfault::preprocess
