#include <cstdlib>
#include <string>

#include "imfault/error.hpp"
#include "imfault/kernels.hpp"

namespace imfault::kernels {

#if defined(IMFAULT_HAVE_AVX2)
namespace avx2 {
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
double sum(const double*, std::size_t);
double sum_squares(const double*, std::size_t);
double sum_sq_dev(const double*, double, std::size_t);
double max_value(const double*, std::size_t);
}  // namespace avx2
#endif

#if defined(IMFAULT_HAVE_NEON)
namespace neon {
double dot(const double*, const double*, std::size_t);
void axpy(double, const double*, double*, std::size_t);
double sum(const double*, std::size_t);
double sum_squares(const double*, std::size_t);
double sum_sq_dev(const double*, double, std::size_t);
double max_value(const double*, std::size_t);
}  // namespace neon
#endif

namespace {

constexpr KernelTable kScalar{Isa::Scalar,      scalar::dot,        scalar::axpy,
                              scalar::sum,      scalar::sum_squares, scalar::sum_sq_dev,
                              scalar::max_value};

#if defined(IMFAULT_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2,     avx2::dot,         avx2::axpy,     avx2::sum,
                            avx2::sum_squares, avx2::sum_sq_dev, avx2::max_value};
#endif

#if defined(IMFAULT_HAVE_NEON)
constexpr KernelTable kNeon{Isa::Neon,     neon::dot,         neon::axpy,     neon::sum,
                            neon::sum_squares, neon::sum_sq_dev, neon::max_value};
#endif

const KernelTable& select() {
  if (const char* forced = std::getenv("IMFAULT_ISA")) {
    const std::string name(forced);
    if (name == "scalar") return kScalar;
    if (name == "avx2" && supported(Isa::Avx2)) return table_for(Isa::Avx2);
    if (name == "neon" && supported(Isa::Neon)) return table_for(Isa::Neon);
  }
  if (supported(Isa::Avx2)) return table_for(Isa::Avx2);
  if (supported(Isa::Neon)) return table_for(Isa::Neon);
  return kScalar;
}

}  // namespace

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(IMFAULT_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(IMFAULT_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table_for(Isa isa) {
  if (!supported(isa))
    throw Error(Errc::InvalidSpec, "numerics",
                "kernel variant " + std::string(to_string(isa)) + " not available");
  switch (isa) {
#if defined(IMFAULT_HAVE_AVX2)
    case Isa::Avx2: return kAvx2;
#endif
#if defined(IMFAULT_HAVE_NEON)
    case Isa::Neon: return kNeon;
#endif
    default: return kScalar;
  }
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace imfault::kernels
