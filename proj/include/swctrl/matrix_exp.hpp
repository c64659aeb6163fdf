#pragma once

#include "swctrl/subspace.hpp"

namespace swctrl {

/// e^{m t} by scaling and squaring with a degree-(6,6) Pade approximant.
Matrix matrix_exp(const Matrix& m, double t = 1.0);

/// Integral over [0, s] of e^{m tau} d tau, from the augmented exponential
/// exp([[m, I], [0, 0]] s).
Matrix integrated_exp(const Matrix& m, double s);

}  // namespace swctrl
