#include "imfault/preprocess.hpp"

#include <cmath>
#include <string>

#include "imfault/dft.hpp"
#include "imfault/error.hpp"
#include "imfault/kernels.hpp"
#include "imfault/rng.hpp"

namespace imfault::preprocess {

namespace {
constexpr const char* kModule = "preprocess";
}

void FilterSpec::validate(double sample_rate) const {
  if (order < 1) throw Error(Errc::InvalidSpec, kModule, "filter order must be >= 1");
  if (!(cutoff > 0.0 && cutoff < sample_rate / 2.0))
    throw Error(Errc::CutoffAboveNyquist, kModule,
                "cutoff " + std::to_string(cutoff) + " Hz not in (0, " + std::to_string(sample_rate / 2.0) + ")");
}

double butterworth_gain(double freq, const FilterSpec& spec) {
  const double r = std::abs(freq) / spec.cutoff;
  return 1.0 / std::sqrt(1.0 + std::pow(r, 2.0 * spec.order));
}

std::vector<double> butterworth_filter(std::span<const double> signal, double sample_rate, const FilterSpec& spec) {
  spec.validate(sample_rate);
  auto spectrum = dft(signal, sample_rate);
  const std::size_t n = spectrum.n;
  for (std::size_t k = 0; k < n; ++k) {
    // k and n-k share |f|, so the product stays conjugate symmetric
    const std::size_t mirror = std::min(k, n - k);
    spectrum.bins[k] *= butterworth_gain(spectrum.bin_frequency(mirror), spec);
  }
  return inverse_dft(spectrum);
}

std::vector<double> time_shift(std::span<const double> signal, long shift) {
  const long n = static_cast<long>(signal.size());
  if (std::labs(shift) >= n && n > 0)
    throw Error(Errc::ShiftTooLarge, kModule,
                "|shift| " + std::to_string(std::labs(shift)) + " >= length " + std::to_string(n));
  std::vector<double> out(signal.size());
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = signal[static_cast<std::size_t>(((i + shift) % n + n) % n)];
  return out;
}

std::vector<double> amplitude_scale(std::span<const double> signal, double alpha) {
  if (!(alpha > 0.0)) throw Error(Errc::NonPositiveScale, kModule, "scale must be > 0, got " + std::to_string(alpha));
  std::vector<double> out(signal.begin(), signal.end());
  for (double& v : out) v *= alpha;
  return out;
}

std::vector<double> add_noise(std::span<const double> signal, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(Errc::NegativeSigma, kModule, "sigma must be >= 0, got " + std::to_string(sigma));
  std::vector<double> out(signal.begin(), signal.end());
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (double& v : out) v += sigma * rng.normal();
  return out;
}

void AugmentationSpec::validate() const {
  if (!(shift_fraction >= 0.0 && shift_fraction < 1.0))
    throw Error(Errc::InvalidSpec, kModule, "shift_fraction must lie in [0, 1)");
  if (!(scale_min > 0.0 && scale_max >= scale_min))
    throw Error(Errc::InvalidSpec, kModule, "scale range must satisfy 0 < min <= max");
  if (!(noise_fraction >= 0.0)) throw Error(Errc::InvalidSpec, kModule, "noise_fraction must be >= 0");
}

sim::Recording filter_recording(const sim::Recording& rec, const FilterSpec& spec) {
  sim::Recording out = rec;
  for (auto& ch : out.channels) ch = butterworth_filter(ch, rec.sample_rate, spec);
  return out;
}

std::vector<sim::Recording> augment_dataset(const std::vector<sim::Recording>& recordings,
                                            const AugmentationSpec& spec, std::size_t copies,
                                            std::uint64_t seed) {
  spec.validate();
  std::vector<sim::Recording> out = recordings;
  if (copies == 0) return out;
  out.reserve(recordings.size() * (copies + 1));
  for (std::size_t r = 0; r < recordings.size(); ++r) {
    const auto& src = recordings[r];
    for (std::size_t c = 0; c < copies; ++c) {
      Rng rng(derive_seed(seed, r * copies + c));
      const long len = static_cast<long>(src.length());
      const long max_shift = static_cast<long>(std::floor(spec.shift_fraction * static_cast<double>(len)));
      const long shift = max_shift > 0 ? static_cast<long>(rng.below(static_cast<std::uint64_t>(2 * max_shift + 1))) - max_shift : 0;
      const double alpha = rng.uniform(spec.scale_min, spec.scale_max);
      sim::Recording variant = src;
      variant.id = src.id + "-aug" + std::to_string(c);
      variant.seed = rng.next_u64();
      for (std::size_t ch = 0; ch < variant.channels.size(); ++ch) {
        auto x = amplitude_scale(time_shift(src.channels[ch], shift), alpha);
        const double rms = std::sqrt(kernels::sum_squares(x) / static_cast<double>(x.size()));
        x = add_noise(x, spec.noise_fraction * rms, derive_seed(variant.seed, ch));
        variant.channels[ch] = std::move(x);
      }
      out.push_back(std::move(variant));
    }
  }
  return out;
}

}  // namespace imfault::preprocess
