#include "imfault/gradcheck.hpp"

#include <cmath>
#include <string>

#include "imfault/error.hpp"

namespace imfault {

Matrix finite_diff_grad(const ScalarFunction& f, const Matrix& x, double h) {
  if (!(h > 0.0)) throw Error(Errc::InvalidSpec, "numerics", "finite_diff_grad step must be positive");
  Matrix probe = x;
  Matrix grad(x.rows(), x.cols());
  auto eval = [&](std::size_t idx) {
    const double v = f(probe);
    if (!std::isfinite(v))
      throw Error(Errc::NonFinite, "numerics", "objective not finite at perturbed entry " + std::to_string(idx));
    return v;
  };
  for (std::size_t idx = 0; idx < x.size(); ++idx) {
    const double orig = x.values()[idx];
    probe.values()[idx] = orig + h;
    const double up = eval(idx);
    probe.values()[idx] = orig - h;
    const double down = eval(idx);
    probe.values()[idx] = orig;
    grad.values()[idx] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace imfault
