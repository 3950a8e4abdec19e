#include "imfault/dft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "imfault/error.hpp"

namespace imfault {

namespace {

constexpr std::size_t kMaxRadix = 61;

struct Plan {
  std::size_t n = 0;
  std::vector<std::size_t> factors;
  std::vector<Complex> twiddles;  // e^{-2 pi i j / n}
  // Bluestein path
  bool bluestein = false;
  std::vector<Complex> chirp;           // e^{-i pi k^2 / n}
  std::vector<Complex> chirp_filter;    // FFT of the conjugate chirp, length m
  std::shared_ptr<const Plan> sub;      // power-of-two plan of length m
};

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> f;
  while (n % 4 == 0) {
    f.push_back(4);
    n /= 4;
  }
  while (n % 2 == 0) {
    f.push_back(2);
    n /= 2;
  }
  for (std::size_t p = 3; p * p <= n; p += 2) {
    while (n % p == 0) {
      f.push_back(p);
      n /= p;
    }
  }
  if (n > 1) f.push_back(n);
  return f;
}

std::shared_ptr<const Plan> plan_for(std::size_t n);

std::shared_ptr<const Plan> make_plan(std::size_t n) {
  auto plan = std::make_shared<Plan>();
  plan->n = n;
  plan->factors = factorize(n);
  bool smooth = true;
  for (auto f : plan->factors) smooth = smooth && f <= kMaxRadix;
  if (smooth) {
    plan->twiddles.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double a = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      plan->twiddles[j] = {std::cos(a), std::sin(a)};
    }
    return plan;
  }
  plan->bluestein = true;
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  plan->sub = plan_for(m);
  plan->chirp.resize(n);
  const std::size_t two_n = 2 * n;
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small and exact
    const auto k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) % two_n);
    const double a = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
    plan->chirp[k] = {std::cos(a), std::sin(a)};
  }
  plan->chirp_filter.assign(m, Complex{});
  plan->chirp_filter[0] = std::conj(plan->chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    plan->chirp_filter[k] = std::conj(plan->chirp[k]);
    plan->chirp_filter[m - k] = std::conj(plan->chirp[k]);
  }
  fft_inplace(plan->chirp_filter, false);
  return plan;
}

std::shared_ptr<const Plan> plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, std::shared_ptr<const Plan>> cache;
  {
    std::lock_guard lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
  }
  auto plan = make_plan(n);
  std::lock_guard lock(mu);
  return cache.emplace(n, std::move(plan)).first->second;
}

// Decimation in time: out[0..n) = DFT of in[0], in[stride], ...
void mixed_radix(const Plan& plan, const Complex* in, std::size_t stride, Complex* out,
                 std::size_t n, std::size_t level, std::vector<Complex>& scratch) {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const std::size_t r = plan.factors[level];
  const std::size_t m = n / r;
  for (std::size_t q = 0; q < r; ++q)
    mixed_radix(plan, in + q * stride, stride * r, out + q * m, m, level + 1, scratch);

  const std::size_t tw_step = plan.n / n;  // W_n^x == W_N^{x * N/n}
  Complex* buf = scratch.data() + level * kMaxRadix;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t q = 0; q < r; ++q) buf[q] = out[q * m + k] * plan.twiddles[(q * k * tw_step) % plan.n];
    if (r == 2) {
      out[k] = buf[0] + buf[1];
      out[k + m] = buf[0] - buf[1];
    } else if (r == 4) {
      const Complex a0 = buf[0] + buf[2];
      const Complex a1 = buf[0] - buf[2];
      const Complex a2 = buf[1] + buf[3];
      const Complex d = buf[1] - buf[3];
      const Complex a3{d.imag(), -d.real()};  // -i * d
      out[k] = a0 + a2;
      out[k + m] = a1 + a3;
      out[k + 2 * m] = a0 - a2;
      out[k + 3 * m] = a1 - a3;
    } else {
      const std::size_t base = plan.n / r;  // W_r^y == W_N^{y * N/r}
      for (std::size_t s = 0; s < r; ++s) {
        Complex acc{};
        for (std::size_t q = 0; q < r; ++q) acc += buf[q] * plan.twiddles[((q * s) % r) * base];
        out[k + s * m] = acc;
      }
    }
  }
}

void forward(const Plan& plan, std::vector<Complex>& data) {
  if (!plan.bluestein) {
    std::vector<Complex> out(plan.n);
    std::vector<Complex> scratch(kMaxRadix * (plan.factors.size() + 1));
    mixed_radix(plan, data.data(), 1, out.data(), plan.n, 0, scratch);
    data.swap(out);
    return;
  }
  const std::size_t n = plan.n;
  const std::size_t m = plan.chirp_filter.size();
  std::vector<Complex> a(m, Complex{});
  for (std::size_t k = 0; k < n; ++k) a[k] = data[k] * plan.chirp[k];
  forward(*plan.sub, a);
  for (std::size_t k = 0; k < m; ++k) a[k] *= plan.chirp_filter[k];
  // inverse of length m via conjugation
  for (auto& v : a) v = std::conj(v);
  forward(*plan.sub, a);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) data[k] = std::conj(a[k]) * inv_m * plan.chirp[k];
}

}  // namespace

void fft_inplace(std::vector<Complex>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) return;
  const auto plan = plan_for(n);
  if (!inverse) {
    forward(*plan, data);
    return;
  }
  for (auto& v : data) v = std::conj(v);
  forward(*plan, data);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : data) v = std::conj(v) * inv_n;
}

ComplexSpectrum dft(std::span<const double> signal, double sample_rate) {
  if (signal.size() < 2)
    throw Error(Errc::EmptySignal, "numerics", "dft needs at least 2 samples, got " + std::to_string(signal.size()));
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw Error(Errc::InvalidSpec, "numerics", "dft sample_rate must be positive");
  ComplexSpectrum s;
  s.sample_rate = sample_rate;
  s.n = signal.size();
  s.bins.resize(signal.size());
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (!std::isfinite(signal[i]))
      throw Error(Errc::NonFinite, "numerics", "dft input sample " + std::to_string(i) + " is not finite");
    s.bins[i] = {signal[i], 0.0};
  }
  fft_inplace(s.bins, false);
  return s;
}

std::vector<double> inverse_dft(const ComplexSpectrum& spectrum) {
  const std::size_t n = spectrum.n;
  if (spectrum.one_sided || spectrum.bins.size() != n || n < 2)
    throw Error(Errc::AsymmetricSpectrum, "numerics", "inverse_dft needs a full two-sided spectrum");
  double scale = 1.0;
  for (const auto& b : spectrum.bins) scale = std::max(scale, std::abs(b));
  const double tol = 1e-9 * scale;
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const Complex mirror = spectrum.bins[(n - k) % n];
    if (std::abs(spectrum.bins[k] - std::conj(mirror)) > tol)
      throw Error(Errc::AsymmetricSpectrum, "numerics",
                  "bin " + std::to_string(k) + " is not the conjugate of bin " + std::to_string((n - k) % n));
  }
  std::vector<Complex> data = spectrum.bins;
  fft_inplace(data, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = data[i].real();
  return out;
}

ComplexSpectrum one_sided(const ComplexSpectrum& spectrum) {
  if (spectrum.one_sided) return spectrum;
  ComplexSpectrum s;
  s.sample_rate = spectrum.sample_rate;
  s.n = spectrum.n;
  s.one_sided = true;
  s.bins.assign(spectrum.bins.begin(), spectrum.bins.begin() + static_cast<std::ptrdiff_t>(spectrum.n / 2 + 1));
  return s;
}

std::vector<double> one_sided_power(std::span<const double> signal) {
  const auto s = dft(signal, 1.0);
  std::vector<double> p(s.n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::norm(s.bins[k]);
  return p;
}

}  // namespace imfault
