#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace ridgelab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One axis of a box; either endpoint may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

struct Box {
  std::vector<Interval> axes;
  int dim() const { return static_cast<int>(axes.size()); }
  bool finite() const;
};

/// Planar cone {(t, x) : |x| < c t}, or {|x| < c |t|} when two_sided.
struct Cone {
  double c = 1.0;
  bool two_sided = false;
};

/// Integration region: a product of intervals or a planar cone.
class Domain {
 public:
  static Domain box(std::vector<Interval> axes);
  static Domain cube(int dim, double lo, double hi);
  static Domain cone(double c, bool two_sided);
  /// The real line, or R x [0,1]^n when extra_unit_axes = n.
  static Domain line_times_unit_cube(int extra_unit_axes);

  int dim() const;
  bool is_box() const { return std::holds_alternative<Box>(value_); }
  const Box& as_box() const { return std::get<Box>(value_); }
  const Cone& as_cone() const { return std::get<Cone>(value_); }

 private:
  explicit Domain(std::variant<Box, Cone> v) : value_(std::move(v)) {}
  std::variant<Box, Cone> value_;
};

struct QuadratureConfig {
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  int base_cells_per_axis = 64;
  /// Truncation radii are initial_radius * 2^k for k = 0..max_doublings.
  double initial_radius = 4.0;
  int max_doublings = 12;
  /// Gauss-Legendre points per cell and axis.
  int order = 8;

  void validate() const;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  /// Radius of the last truncation used; 0 when the domain needed none.
  double truncation_radius = 0.0;
  long long cells_evaluated = 0;
  bool converged = true;
};

/// The truncation schedule ran out before the newest shell became negligible.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, QuadratureResult partial)
      : std::runtime_error(what), partial_(partial) {}
  const QuadratureResult& partial() const { return partial_; }

 private:
  QuadratureResult partial_;
};

/// The hyperplane normal . x + offset = 0.
struct Hyperplane {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

/// Known crease locations of an integrand. Axis knots become cell
/// boundaries. Hyperplanes with a nonzero first normal component split the
/// innermost (axis 0) integration at their crossing point; hyperplanes
/// normal to a single axis become knots on that axis. Cone domains only
/// honor knots on the t axis.
struct KinkHints {
  std::vector<std::vector<double>> axis_knots;
  std::vector<Hyperplane> planes;

  KinkHints& merge(const KinkHints& other);
};

using Integrand = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

struct GaussLegendreRule {
  Eigen::VectorXd nodes;    // on [-1, 1], ascending
  Eigen::VectorXd weights;
};

/// Cached Gauss-Legendre rule of the given order (2..128).
const GaussLegendreRule& gauss_legendre(int order);

/// Composite tensor Gauss-Legendre quadrature with shell truncation of
/// unbounded axes. Throws NonConvergenceError when the schedule is exhausted.
QuadratureResult integrate(const Integrand& f, const Domain& d, const QuadratureConfig& cfg = {},
                           const KinkHints& hints = {});

/// (integral of |f|^p over d)^(1/p), error propagated through the 1/p power.
QuadratureResult lp_norm(const Integrand& f, const Domain& d, double p, const QuadratureConfig& cfg = {},
                         const KinkHints& hints = {});

QuadratureResult lp_distance(const Integrand& f, const Integrand& g, const Domain& d, double p,
                             const QuadratureConfig& cfg = {}, const KinkHints& hints = {});

/// Explicit quadrature nodes (one column per point) and weights.
struct NodeSet {
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
  long long size() const { return weights.size(); }
};

/// The nodes integrate() would use on a box, with unbounded axes truncated at
/// initial_radius * 2^levels. Fitting code uses this so that its Gram matrices
/// and the reported residuals share one rule.
NodeSet quadrature_nodes(const Box& box, const QuadratureConfig& cfg, const KinkHints& hints = {},
                         int levels = 0);

/// Breakpoints of the cells on a finite interval: `cells` uniform cells plus
/// the knots that fall strictly inside.
std::vector<double> axis_breakpoints(double lo, double hi, int cells, std::span<const double> knots);

}  // namespace ridgelab
