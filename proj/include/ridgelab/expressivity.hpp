#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ridgelab/networks.hpp"
#include "ridgelab/quadrature.hpp"

namespace ridgelab {

struct GrowthProfile {
  std::vector<double> radii;
  std::vector<double> norms;
  double p = 1.0;
  std::string domain_family;
};

/// Radii used when a growth experiment does not name its own.
inline const std::vector<double> kDefaultGrowthRadii{1, 2, 4, 8, 16};

/// L^p norms of a planar shallow net over [-R, R] x [0, R] for each radius.
GrowthProfile ridge_norm_growth(const ShallowNetd& net, const std::vector<double>& radii, double p,
                                const QuadratureConfig& cfg = {});

/// True when every step of the profile grows by at least floor^(log2 of the radius ratio).
bool grows_at_least(const GrowthProfile& profile, double floor_per_doubling);

/// L^1 norm of h(t) = ReLU(t + 2) - 2 ReLU(t + 1) + ReLU(t) over the cone
/// {|x| < c t} (or {|x| < c |t|} when two_sided).
QuadratureResult cone_example_integral(double c, bool two_sided, const QuadratureConfig& cfg = {});

enum class Verdict { ConsistentWithInexpressivity, NetVanishes, Inconclusive };
std::string verdict_name(Verdict v);

struct ProbeConfig {
  int neurons = 100;
  double inner_radius = 4.0;
  std::vector<double> outer_radii{8.0, 16.0, 32.0};
  double p = 1.0;
  std::uint64_t seed = 0;
  /// Outer norms must grow by this factor per doubling of the radius.
  double growth_floor = 1.5;
  /// Inner residual must be below this fraction of the target's inner norm.
  double fit_fraction = 0.5;
  /// A net whose inner norm is below this is treated as zero.
  double vanish_threshold = 1e-10;

  void validate() const;
};

struct ProbeReport {
  double inner_residual = 0.0;
  double target_inner_norm = 0.0;
  double net_inner_norm = 0.0;
  /// Norms of the fitted net alone over [-R, R]^2.
  GrowthProfile outer_norms;
  Verdict verdict = Verdict::Inconclusive;
  ShallowNetd net{2, Activationd::relu()};
  double condition_estimate = 1.0;
  bool regularized = false;
};

/// The neuron directions and biases fit_and_probe uses for a given seed.
ShallowNetd probe_dictionary(const Activationd& activation, const ProbeConfig& probe);

/// Least-squares fit of a planar shallow net on [-R_in, R_in]^2, followed by
/// the fitted net's own norms over the outer boxes.
ProbeReport fit_and_probe(const Integrand& target, const Activationd& activation, const ProbeConfig& probe,
                          const QuadratureConfig& cfg = {});

}  // namespace ridgelab
