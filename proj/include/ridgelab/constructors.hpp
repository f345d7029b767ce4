#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ridgelab/networks.hpp"
#include "ridgelab/quadrature.hpp"

namespace ridgelab {

/// G(x) = ReLU(x) - 2 ReLU(x - 1) + ReLU(x - 2), as a depth-2 net on R.
DeepReluNetd bump_1d();

/// F(x) = G(G(x_1) + ... + G(x_n) - (n - 1)), as a depth-3 net on R^n.
/// F vanishes outside [0, 2]^n and F(1, ..., 1) = 1.
DeepReluNetd bump_nd(int n);

/// t * F((x - corner) / sigma); supported on corner + sigma [0, 2]^n.
DeepReluNetd family_member(int n, const Eigen::VectorXd& corner, double sigma, double t);

enum class FitMode { Sample, LeastSquares };

struct GridSpec {
  Box box;  // finite on every axis
  double sigma = 1.0;
  FitMode mode = FitMode::LeastSquares;
  /// Lattice points per sigma along each axis.
  int density = 2;
};

struct FitReport {
  Eigen::VectorXd coefficients;
  /// Quadrature-measured L^p residual over the whole space at exponent p.
  double residual_lp = 0.0;
  double target_norm = 0.0;
  double relative_residual = 0.0;
  double p = 2.0;
  long long dictionary_size = 0;
  double condition_estimate = 1.0;
  /// The normal equations were singular and a ridge term was added.
  bool regularized = false;
};

/// Translates of the F bump on a lattice of spacing sigma / density covering
/// a box. Member j has its peak at the center of lattice cell j, i.e.
/// corner_j = center_j - sigma.
class BumpLattice {
 public:
  BumpLattice(const Box& box, double sigma, int density = 1);

  int dim() const { return static_cast<int>(counts_.size()); }
  long long size() const { return size_; }
  long long count(int axis) const { return counts_[axis]; }
  double sigma() const { return sigma_; }
  int density() const { return density_; }
  double spacing() const { return spacing_; }
  Eigen::VectorXd center(long long index) const;
  Eigen::VectorXd corner(long long index) const { return center(index).array() - sigma_; }

  /// The box covered by the union of member supports.
  Box support_box() const;

  /// Calls visit(index, value) for every member that can be nonzero at x.
  template <class Visit>
  void for_each_active(const Eigen::Ref<const Eigen::VectorXd>& x, Visit&& visit) const;

  double member_value(long long index, const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double evaluate(const Eigen::VectorXd& coefficients, const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Value at a lattice point of the sum of all members of an unbounded
  /// lattice: 1 at density 1, 1 + n at density 2.
  double partition_sum() const;

  /// Creases of every member: lattice knots on each axis plus the faces of
  /// the cross-polytope pyramids, restricted to `region`.
  KinkHints hints(const Box& region) const;

  /// Sum of the members scaled by the coefficients, as one depth-3 net.
  DeepReluNetd assemble(const Eigen::VectorXd& coefficients) const;

 private:
  Eigen::VectorXd origin_;  // lower corner of the lattice
  std::vector<long long> counts_;
  long long size_ = 0;
  double sigma_;
  int density_;
  double spacing_;
};

/// Grids for a sigma schedule whose lattice density grows like
/// sqrt(sigma_0 / sigma_k), so the spacing shrinks faster than sigma.
/// At a fixed density the least-squares residual levels off at a floor set
/// by how badly lattice translates of F reproduce constants.
std::vector<GridSpec> refinement_schedule(const Box& box, const std::vector<double>& sigmas,
                                          FitMode mode = FitMode::LeastSquares, int base_density = 2);

struct Depth3Approximation {
  DeepReluNetd net;
  FitReport report;
  /// Corner z_i of every member (one column each) and the common sigma.
  Eigen::MatrixXd corners;
  double sigma = 1.0;
};

/// Places one family member per lattice cell of the grid box and fits the
/// coefficients by sampling the target at cell centers (divided by the
/// lattice partition sum) or by the quadrature-weighted L^2 projection. The residual is measured at exponent
/// p over R^n: the fit region plus the raw target's tail outside it.
Depth3Approximation build_depth3_approximator(const Integrand& target, const GridSpec& grid, double p,
                                              const QuadratureConfig& cfg = {},
                                              const KinkHints& target_hints = {});

struct ShallowFitOptions {
  /// Dictionary size; at most scales().size() * knots.size().
  int dictionary_size = 200;
  /// Points where unit transitions are centered.
  std::vector<double> knots;
  FitMode mode = FitMode::LeastSquares;

  /// Scales 2^j, j = -2..5.
  static std::vector<double> scales();
  /// `count` evenly spaced knots on [lo, hi].
  static std::vector<double> even_knots(double lo, double hi, int count);
};

/// Difference order that turns an activation into an integrable unit:
/// 1 for bounded activations, 2 for activations with linear growth.
int integrable_difference_order(const Activationd& activation);

struct ShallowApproximation {
  ShallowNetd net;
  FitReport report;
  /// (scale, knot) of each dictionary member.
  std::vector<std::pair<double, double>> members;
  int difference_order = 1;
};

/// Fits difference units Delta^m_1[phi](a (x - c) - m/2) over the scale grid
/// and the knots, then expands every unit with a nonzero coefficient into
/// m + 1 neurons of phi itself.
ShallowApproximation build_shallow_1d(const Integrand& target, const Activationd& activation,
                                      const ShallowFitOptions& options, double p = 2.0,
                                      const QuadratureConfig& cfg = {}, const KinkHints& target_hints = {});

struct LiftedApproximation {
  ShallowNetd net1d;
  ShallowNetd net;
  /// Residual over R x [0,1]^n of the lifted net against the lifted target.
  FitReport report;
  double residual_1d = 0.0;
  /// residual (lifted) / residual_1d, and its predicted value |y_0|^(-1/p).
  double ratio = 0.0;
  double expected_ratio = 0.0;
};

/// Approximates gamma on R, then lifts both gamma and the net along y onto
/// R x [0,1]^n with n = y.size() - 1.
LiftedApproximation build_lifted_approximator(const Integrand& gamma, const Eigen::VectorXd& y,
                                              const Activationd& activation, const ShallowFitOptions& options,
                                              double p, const QuadratureConfig& cfg = {},
                                              const KinkHints& gamma_hints = {});

// ---------------------------------------------------------------------------

template <class Visit>
void BumpLattice::for_each_active(const Eigen::Ref<const Eigen::VectorXd>& x, Visit&& visit) const {
  const int n = dim();
  // Member j is nonzero only when |x_i - center_i| < sigma on every axis.
  long long first[4], span[4];
  for (int i = 0; i < n; ++i) {
    const double u = (x[i] - origin_[i]) / spacing_ - 0.5;
    long long lo = static_cast<long long>(std::floor(u)) - density_ + 1;
    long long hi = lo + 2 * density_ - 1;
    lo = std::max<long long>(lo, 0);
    hi = std::min<long long>(hi, counts_[i] - 1);
    if (lo > hi) return;
    first[i] = lo;
    span[i] = hi - lo + 1;
  }
  long long total = 1;
  for (int i = 0; i < n; ++i) total *= span[i];
  for (long long combo = 0; combo < total; ++combo) {
    long long c = combo, index = 0;
    for (int i = 0; i < n; ++i) {
      const long long j = first[i] + c % span[i];
      c /= span[i];
      index = index * counts_[i] + j;
    }
    visit(index, member_value(index, x));
  }
}

}  // namespace ridgelab
