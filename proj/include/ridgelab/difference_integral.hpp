#pragma once

#include "ridgelab/activations.hpp"
#include "ridgelab/quadrature.hpp"

namespace ridgelab {

/// Integral over the real line of a first-order difference unit.
///
/// Bounded bases (both asymptotic slopes zero) are integrated directly. Bases
/// that vanish asymptotically at -inf and grow linearly at +inf (ReLU, ELU,
/// Softplus) are first reduced to the sigmoidal unit Delta^1_1[phi] and the
/// integral of Delta^1_rho of that unit is returned. Bases with a nonzero
/// slope at -inf (LeakyReLU) have no integrable reduction here and raise
/// NonConvergenceError.
QuadratureResult difference_integral(const DifferenceUnit<double>& unit, const QuadratureConfig& cfg = {});

}  // namespace ridgelab
