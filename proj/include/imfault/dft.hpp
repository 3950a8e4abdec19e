#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace imfault {

using Complex = std::complex<double>;

struct ComplexSpectrum {
  std::vector<Complex> bins;
  double sample_rate = 0.0;
  std::size_t n = 0;        // length of the transformed signal
  bool one_sided = false;   // bins.size() == n/2 + 1 when set

  double bin_frequency(std::size_t k) const {
    return static_cast<double>(k) * sample_rate / static_cast<double>(n);
  }
};

// Exact DFT, X_k = sum_n x_n e^{-2 pi i k n / N}, of any length >= 2.
// Smooth lengths use a mixed-radix Cooley-Tukey plan, lengths with a large
// prime factor go through Bluestein's chirp-z convolution.
ComplexSpectrum dft(std::span<const double> signal, double sample_rate);

// Requires a two-sided, conjugate-symmetric spectrum (a real signal's).
std::vector<double> inverse_dft(const ComplexSpectrum& spectrum);

ComplexSpectrum one_sided(const ComplexSpectrum& spectrum);

// |X_k|^2 for k = 0..N/2 of a real signal.
std::vector<double> one_sided_power(std::span<const double> signal);

// In-place complex transform. Forward is unnormalized; inverse divides by N.
void fft_inplace(std::vector<Complex>& data, bool inverse = false);

}  // namespace imfault
