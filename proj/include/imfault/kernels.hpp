#pragma once
// Data-parallel inner loops used by the dense algebra, the feature extractors
// and the GCN aggregation. Each kernel has a scalar reference implementation;
// vector variants are selected once at runtime from CPU capabilities.
//
// Set IMFAULT_ISA=scalar|avx2|neon to force a particular variant.

#include <cstddef>
#include <span>
#include <string_view>

namespace imfault::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa);

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // sum of (x - mu)^2
  double (*sum_sq_dev)(const double* x, double mu, std::size_t n);
  // n >= 1
  double (*max_value)(const double* x, std::size_t n);
};

bool supported(Isa isa);
const KernelTable& table_for(Isa isa);  // throws if unsupported on this CPU/build
const KernelTable& active();

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum(const double* x, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double sum_sq_dev(const double* x, double mu, std::size_t n);
double max_value(const double* x, std::size_t n);
}  // namespace scalar

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }
inline double sum_squares(std::span<const double> x) {
  return active().sum_squares(x.data(), x.size());
}
inline double sum_sq_dev(std::span<const double> x, double mu) {
  return active().sum_sq_dev(x.data(), mu, x.size());
}
inline double max_value(std::span<const double> x) {
  return active().max_value(x.data(), x.size());
}

}  // namespace imfault::kernels
