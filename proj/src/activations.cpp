#include "ridgelab/activations.hpp"

#include <array>

#include "ridgelab/difference_integral.hpp"

namespace ridgelab {

namespace {
constexpr std::array<std::pair<std::string_view, ActivationKind>, 6> kNames{{
    {"logistic", ActivationKind::Logistic},
    {"relu", ActivationKind::ReLU},
    {"elu", ActivationKind::ELU},
    {"softplus", ActivationKind::Softplus},
    {"leakyrelu", ActivationKind::LeakyReLU},
    {"custom", ActivationKind::Custom},
}};
}  // namespace

std::string_view activation_name(ActivationKind kind) {
  for (const auto& [name, k] : kNames)
    if (k == kind) return name;
  return "unknown";
}

ActivationKind activation_kind_from_name(std::string_view name) {
  for (const auto& [n, k] : kNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

QuadratureResult difference_integral(const DifferenceUnit<double>& unit, const QuadratureConfig& cfg) {
  if (unit.order != 1) throw std::invalid_argument("difference_integral is defined for order-1 units");
  if (unit.step == 0.0) return {};

  const auto limits = asymptotes(unit.base);
  const double rho = unit.step;
  Integrand integrand;
  if (limits.bounded()) {
    integrand = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
      return unit.base(x[0] + rho) - unit.base(x[0]);
    };
  } else if (limits.beta_minus == 0.0) {
    // Delta^1_rho applied to the sigmoidal reduction s(x) = phi(x + 1) - phi(x).
    integrand = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
      const auto& phi = unit.base;
      const double t = x[0];
      return (phi(t + rho + 1.0) - phi(t + rho)) - (phi(t + 1.0) - phi(t));
    };
  } else {
    QuadratureResult partial;
    partial.converged = false;
    partial.value = std::numeric_limits<double>::quiet_NaN();
    throw NonConvergenceError("difference unit of '" + unit.base.label() +
                                  "' tends to different nonzero slopes at +/-inf and is not integrable",
                              partial);
  }

  KinkHints hints;
  if (unit.base.has_kink()) {
    hints.axis_knots = {{-rho - 1.0, -rho, -1.0, 0.0}};
  }
  return integrate(integrand, Domain::line_times_unit_cube(0), cfg, hints);
}

}  // namespace ridgelab
