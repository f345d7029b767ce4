#include "ridgelab/expressivity.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ridgelab {

GrowthProfile ridge_norm_growth(const ShallowNetd& net, const std::vector<double>& radii, double p,
                                const QuadratureConfig& cfg) {
  if (net.dim() != 2) throw std::invalid_argument("ridge_norm_growth needs a planar net");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0)) throw std::invalid_argument("radii must be positive");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw std::invalid_argument("radii must be strictly increasing");
  }
  GrowthProfile profile{radii, {}, p, "[-R,R]x[0,R]"};
  const auto hints = kink_hints(net);
  const auto f = as_integrand(net);
  for (double r : radii) profile.norms.push_back(lp_norm(f, Domain::box({{-r, r}, {0.0, r}}), p, cfg, hints).value);
  return profile;
}

bool grows_at_least(const GrowthProfile& profile, double floor_per_doubling) {
  for (size_t i = 1; i < profile.norms.size(); ++i) {
    const double required = std::pow(floor_per_doubling, std::log2(profile.radii[i] / profile.radii[i - 1]));
    if (!(profile.norms[i] > profile.norms[i - 1])) return false;
    if (!(profile.norms[i] >= required * profile.norms[i - 1])) return false;
  }
  return true;
}

QuadratureResult cone_example_integral(double c, bool two_sided, const QuadratureConfig& cfg) {
  const auto h = [](double t) {
    const auto r = [](double v) { return v > 0 ? v : 0.0; };
    return r(t + 2.0) - 2.0 * r(t + 1.0) + r(t);
  };
  KinkHints hints;
  hints.axis_knots = {{-2.0, -1.0, 0.0}, {}};
  return integrate([&](const Eigen::Ref<const Eigen::VectorXd>& x) { return std::abs(h(x[0])); },
                   Domain::cone(c, two_sided), cfg, hints);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ConsistentWithInexpressivity: return "consistent_with_inexpressivity";
    case Verdict::NetVanishes: return "net_vanishes";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

void ProbeConfig::validate() const {
  if (neurons < 1) throw std::invalid_argument("probe needs at least one neuron");
  if (!(inner_radius > 0)) throw std::invalid_argument("inner radius must be positive");
  if (outer_radii.empty()) throw std::invalid_argument("probe needs outer radii");
  for (size_t i = 0; i < outer_radii.size(); ++i) {
    if (!(outer_radii[i] > inner_radius)) throw std::invalid_argument("outer radii must exceed the inner radius");
    if (i > 0 && !(outer_radii[i] > outer_radii[i - 1]))
      throw std::invalid_argument("outer radii must be strictly increasing");
  }
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and >= 1");
  if (!(growth_floor > 0)) throw std::invalid_argument("growth floor must be positive");
}

ShallowNetd probe_dictionary(const Activationd& activation, const ProbeConfig& probe) {
  // Directions from the raw engine output so the dictionary does not depend
  // on the standard library's distribution implementation.
  std::mt19937_64 engine(probe.seed);
  std::vector<Neuron<double>> neurons;
  const int k = probe.neurons;
  for (int i = 0; i < k; ++i) {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    const double theta = 2.0 * std::numbers::pi * u;
    const double knot = -probe.inner_radius + 2.0 * probe.inner_radius * (i + 0.5) / k;
    neurons.push_back({1.0, Eigen::Vector2d(std::cos(theta), std::sin(theta)), -knot});
  }
  return ShallowNetd(2, activation, 0.0, std::move(neurons));
}

ProbeReport fit_and_probe(const Integrand& target, const Activationd& activation, const ProbeConfig& probe,
                          const QuadratureConfig& cfg) {
  probe.validate();
  const ShallowNetd dict = probe_dictionary(activation, probe);
  const auto hints = kink_hints(dict);
  const double r = probe.inner_radius;
  const Domain inner = Domain::box({{-r, r}, {-r, r}});
  const NodeSet nodes = quadrature_nodes(inner.as_box(), cfg, hints);

  // Columns: the constant term, then one per neuron.
  const Eigen::Index k = probe.neurons;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  constexpr Eigen::Index kChunk = 4096;
  Eigen::MatrixXd features;
  for (Eigen::Index start = 0; start < nodes.size(); start += kChunk) {
    const Eigen::Index len = std::min<Eigen::Index>(kChunk, nodes.size() - start);
    features.resize(len, k + 1);
    Eigen::VectorXd values(len);
    for (Eigen::Index i = 0; i < len; ++i) {
      const auto x = nodes.points.col(start + i);
      features(i, 0) = 1.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        const auto& n = dict.neurons()[j];
        features(i, j + 1) = activation(n.weight.dot(x) + n.bias);
      }
      values[i] = target(x);
    }
    const auto w = nodes.weights.segment(start, len);
    gram.noalias() += features.transpose() * w.asDiagonal() * features;
    rhs.noalias() += features.transpose() * w.cwiseProduct(values);
  }

  ProbeReport report;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13) {
    ldlt.compute(gram + 1e-10 * gram.trace() * Eigen::MatrixXd::Identity(k + 1, k + 1));
    report.regularized = true;
  }
  report.condition_estimate = 1.0 / ldlt.rcond();
  const Eigen::VectorXd coeffs = rhs.isZero(0.0) ? Eigen::VectorXd::Zero(k + 1) : Eigen::VectorXd(ldlt.solve(rhs));

  std::vector<Neuron<double>> neurons = dict.neurons();
  for (Eigen::Index j = 0; j < k; ++j) neurons[j].coeff = coeffs[j + 1];
  report.net = ShallowNetd(2, activation, coeffs[0], std::move(neurons));

  const auto net_fn = as_integrand(report.net);
  report.inner_residual = lp_distance(target, net_fn, inner, probe.p, cfg, hints).value;
  report.target_inner_norm = lp_norm(target, inner, probe.p, cfg, hints).value;
  report.net_inner_norm = lp_norm(net_fn, inner, probe.p, cfg, hints).value;

  report.outer_norms = {probe.outer_radii, {}, probe.p, "[-R,R]^2"};
  for (double big : probe.outer_radii)
    report.outer_norms.norms.push_back(
        lp_norm(net_fn, Domain::box({{-big, big}, {-big, big}}), probe.p, cfg, hints).value);

  if (report.net_inner_norm < probe.vanish_threshold) {
    report.verdict = Verdict::NetVanishes;
  } else if (report.inner_residual < probe.fit_fraction * report.target_inner_norm &&
             grows_at_least(report.outer_norms, probe.growth_floor)) {
    report.verdict = Verdict::ConsistentWithInexpressivity;
  } else {
    report.verdict = Verdict::Inconclusive;
  }
  return report;
}

}  // namespace ridgelab
