#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ridgelab/errors.hpp"

namespace ridgelab {

enum class ActivationKind { Logistic, ReLU, ELU, Softplus, LeakyReLU, Custom };

/// Slope/intercept pairs such that phi(t) - beta * t -> alpha as t -> +inf / -inf.
struct AsymptoticAffine {
  double beta_plus = 0.0;
  double alpha_plus = 0.0;
  double beta_minus = 0.0;
  double alpha_minus = 0.0;

  bool bounded() const { return beta_plus == 0.0 && beta_minus == 0.0; }
  friend bool operator==(const AsymptoticAffine&, const AsymptoticAffine&) = default;
};

std::string_view activation_name(ActivationKind kind);
ActivationKind activation_kind_from_name(std::string_view name);

/// A scalar activation function. Immutable value type.
///
/// ELU and LeakyReLU carry a parameter alpha (ELU: alpha > 0, default 1;
/// LeakyReLU: alpha != 1, default 0.01). Custom activations wrap a callable
/// and optionally carry caller-supplied asymptotic descriptors.
template <typename Scalar>
class Activation {
 public:
  using Function = std::function<Scalar(Scalar)>;

  static Activation logistic() { return Activation(ActivationKind::Logistic, 0); }
  static Activation relu() { return Activation(ActivationKind::ReLU, 0); }
  static Activation softplus() { return Activation(ActivationKind::Softplus, 0); }
  static Activation elu(Scalar alpha = Scalar(1)) {
    if (!(alpha > 0)) throw std::invalid_argument("ELU requires alpha > 0");
    return Activation(ActivationKind::ELU, alpha);
  }
  static Activation leaky_relu(Scalar alpha = Scalar(0.01)) {
    if (alpha == Scalar(1) || !std::isfinite(double(alpha)))
      throw std::invalid_argument("LeakyReLU requires a finite alpha != 1");
    return Activation(ActivationKind::LeakyReLU, alpha);
  }
  static Activation custom(Function f, std::optional<AsymptoticAffine> asymptotes = std::nullopt,
                           std::string label = "custom") {
    if (!f) throw std::invalid_argument("custom activation needs a callable");
    Activation a(ActivationKind::Custom, 0);
    a.custom_ = std::move(f);
    a.custom_asymptotes_ = asymptotes;
    a.label_ = std::move(label);
    return a;
  }
  /// Built-in kinds by name; alpha is ignored for kinds that take no parameter.
  static Activation from_name(std::string_view name, std::optional<Scalar> alpha = std::nullopt) {
    switch (activation_kind_from_name(name)) {
      case ActivationKind::Logistic: return logistic();
      case ActivationKind::ReLU: return relu();
      case ActivationKind::Softplus: return softplus();
      case ActivationKind::ELU: return elu(alpha.value_or(Scalar(1)));
      case ActivationKind::LeakyReLU: return leaky_relu(alpha.value_or(Scalar(0.01)));
      case ActivationKind::Custom: break;
    }
    throw std::invalid_argument("custom activations cannot be built from a name");
  }

  ActivationKind kind() const { return kind_; }
  Scalar alpha() const { return alpha_; }
  bool has_alpha() const { return kind_ == ActivationKind::ELU || kind_ == ActivationKind::LeakyReLU; }
  const std::string& label() const { return label_; }

  /// True when the function has derivative jumps (at 0 for the built-ins).
  bool has_kink() const {
    return kind_ == ActivationKind::ReLU || kind_ == ActivationKind::LeakyReLU ||
           (kind_ == ActivationKind::ELU && alpha_ != Scalar(1));
  }

  /// Evaluation without the finiteness check; used on hot quadrature paths.
  Scalar operator()(Scalar x) const {
    using std::exp;
    using std::log1p;
    switch (kind_) {
      case ActivationKind::Logistic:
        if (x >= 0) return Scalar(1) / (Scalar(1) + exp(-x));
        else {
          const Scalar e = exp(x);
          return e / (Scalar(1) + e);
        }
      case ActivationKind::ReLU:
        return x > 0 ? x : Scalar(0);
      case ActivationKind::ELU:
        return x > 0 ? x : alpha_ * (exp(x) - Scalar(1));
      case ActivationKind::Softplus:
        // log(1 + e^x) = max(x, 0) + log1p(e^{-|x|}); never overflows.
        return (x > 0 ? x : Scalar(0)) + log1p(exp(x > 0 ? -x : x));
      case ActivationKind::LeakyReLU:
        return x > 0 ? x : alpha_ * x;
      case ActivationKind::Custom:
        return custom_(x);
    }
    return Scalar(0);
  }

 private:
  Activation(ActivationKind kind, Scalar alpha) : kind_(kind), alpha_(alpha), label_(activation_name(kind)) {}

  ActivationKind kind_;
  Scalar alpha_;
  Function custom_;
  std::optional<AsymptoticAffine> custom_asymptotes_;
  std::string label_;

  template <typename S>
  friend AsymptoticAffine asymptotes(const Activation<S>& a);
};

using Activationd = Activation<double>;
using Activationf = Activation<float>;

/// phi(x); non-finite input is rejected.
template <typename Scalar>
Scalar eval(const Activation<Scalar>& a, Scalar x) {
  if (!std::isfinite(double(x))) throw std::invalid_argument("activation input must be finite");
  return a(x);
}

/// Analytic limit table of the built-ins. Custom activations return their
/// caller-supplied descriptors or raise UnsupportedError.
template <typename Scalar>
AsymptoticAffine asymptotes(const Activation<Scalar>& a) {
  const double alpha = double(a.alpha());
  switch (a.kind()) {
    case ActivationKind::Logistic: return {0.0, 1.0, 0.0, 0.0};
    case ActivationKind::ReLU: return {1.0, 0.0, 0.0, 0.0};
    case ActivationKind::ELU: return {1.0, 0.0, 0.0, -alpha};
    case ActivationKind::Softplus: return {1.0, 0.0, 0.0, 0.0};
    case ActivationKind::LeakyReLU: return {1.0, 0.0, alpha, 0.0};
    case ActivationKind::Custom:
      if (a.custom_asymptotes_) return *a.custom_asymptotes_;
      throw UnsupportedError("custom activation '" + a.label() + "' has no asymptotic descriptors");
  }
  throw UnsupportedError("unknown activation kind");
}

/// The n-th finite difference of an activation with step rho,
/// Delta^n_rho = Delta^1_rho o Delta^{n-1}_rho, Delta^1_rho[f](x) = f(x + rho) - f(x).
template <typename Scalar>
struct DifferenceUnit {
  Activation<Scalar> base;
  int order = 1;
  Scalar step = Scalar(1);

  DifferenceUnit(Activation<Scalar> b, int n, Scalar rho) : base(std::move(b)), order(n), step(rho) {
    if (n < 1) throw std::invalid_argument("difference order must be >= 1");
    if (!std::isfinite(double(rho))) throw std::invalid_argument("difference step must be finite");
  }
};

namespace detail {
template <typename Scalar>
Scalar difference_recursive(const Activation<Scalar>& a, int order, Scalar step, Scalar x) {
  if (order == 0) return a(x);
  return difference_recursive(a, order - 1, step, x + step) - difference_recursive(a, order - 1, step, x);
}
}  // namespace detail

/// Evaluates Delta^n_rho[phi](x) through the defining recursion.
template <typename Scalar>
Scalar difference_eval(const DifferenceUnit<Scalar>& u, Scalar x) {
  if (!std::isfinite(double(x))) throw std::invalid_argument("difference input must be finite");
  if (u.step == Scalar(0)) return Scalar(0);
  return detail::difference_recursive(u.base, u.order, u.step, x);
}

/// Signed binomial weights (-1)^{n-k} C(n, k), k = 0..n, of the expansion
/// Delta^n_rho[f](x) = sum_k w_k f(x + k rho).
inline std::vector<double> difference_weights(int order) {
  if (order < 0) throw std::invalid_argument("difference order must be >= 0");
  std::vector<double> w(order + 1);
  double c = 1.0;
  for (int k = 0; k <= order; ++k) {
    w[k] = ((order - k) % 2 == 0 ? 1.0 : -1.0) * c;
    c = c * (order - k) / (k + 1);
  }
  return w;
}

}  // namespace ridgelab
