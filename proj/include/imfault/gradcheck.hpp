#pragma once

#include <functional>

#include "imfault/matrix.hpp"

namespace imfault {

using ScalarFunction = std::function<double(const Matrix&)>;

// Central difference (f(x + h e_ij) - f(x - h e_ij)) / 2h for every entry.
Matrix finite_diff_grad(const ScalarFunction& f, const Matrix& x, double h = 1e-5);

}  // namespace imfault
