#include "ridgelab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace ridgelab {

bool Box::finite() const {
  return std::all_of(axes.begin(), axes.end(), [](const Interval& i) { return i.finite(); });
}

Domain Domain::box(std::vector<Interval> axes) {
  if (axes.empty()) throw std::invalid_argument("box needs at least one axis");
  if (axes.size() > 4) throw std::invalid_argument("boxes above dimension 4 are not supported");
  for (const auto& a : axes) {
    if (std::isnan(a.lo) || std::isnan(a.hi) || !(a.lo < a.hi))
      throw std::invalid_argument("box axes need lo < hi");
  }
  return Domain(Box{std::move(axes)});
}

Domain Domain::cube(int dim, double lo, double hi) {
  if (dim < 1) throw std::invalid_argument("cube dimension must be positive");
  return box(std::vector<Interval>(dim, Interval{lo, hi}));
}

Domain Domain::cone(double c, bool two_sided) {
  if (!(c > 0) || !std::isfinite(c)) throw std::invalid_argument("cone aperture c must be positive");
  return Domain(Cone{c, two_sided});
}

Domain Domain::line_times_unit_cube(int extra_unit_axes) {
  std::vector<Interval> axes{{-kInf, kInf}};
  for (int i = 0; i < extra_unit_axes; ++i) axes.push_back({0.0, 1.0});
  return box(std::move(axes));
}

int Domain::dim() const { return is_box() ? as_box().dim() : 2; }

void QuadratureConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0)) throw std::invalid_argument("quadrature tolerances must be positive");
  if (order < 2 || order > 128) throw std::invalid_argument("quadrature order must be in [2, 128]");
  if (base_cells_per_axis < 1) throw std::invalid_argument("base_cells_per_axis must be >= 1");
  if (!(initial_radius > 0) || !std::isfinite(initial_radius))
    throw std::invalid_argument("initial_radius must be positive");
  if (max_doublings < 0) throw std::invalid_argument("max_doublings must be >= 0");
}

KinkHints& KinkHints::merge(const KinkHints& other) {
  if (axis_knots.size() < other.axis_knots.size()) axis_knots.resize(other.axis_knots.size());
  for (size_t a = 0; a < other.axis_knots.size(); ++a)
    axis_knots[a].insert(axis_knots[a].end(), other.axis_knots[a].begin(), other.axis_knots[a].end());
  planes.insert(planes.end(), other.planes.begin(), other.planes.end());
  return *this;
}

// Golub-Welsch on the Jacobi matrix, then Newton-polished against P_n.
const GaussLegendreRule& gauss_legendre(int order) {
  if (order < 2 || order > 128) throw std::invalid_argument("Gauss-Legendre order must be in [2, 128]");
  static std::mutex mutex;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  GaussLegendreRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = rule.nodes[i];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

std::vector<double> axis_breakpoints(double lo, double hi, int cells, std::span<const double> knots) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw std::invalid_argument("axis_breakpoints needs a finite interval with lo < hi");
  cells = std::max(cells, 1);
  std::vector<double> bps(cells + 1);
  for (int i = 0; i <= cells; ++i) bps[i] = lo + (hi - lo) * i / cells;
  bps.back() = hi;
  const double snap = 1e-12 * (hi - lo);
  for (double k : knots) {
    if (!(k > lo + snap && k < hi - snap)) continue;
    auto it = std::lower_bound(bps.begin(), bps.end(), k);
    // Snap interior uniform points onto nearby knots so no sliver cells appear.
    if (it != bps.end() && std::abs(*it - k) <= snap && it != bps.end() - 1) {
      *it = k;
    } else if (it != bps.begin() && std::abs(*(it - 1) - k) <= snap && it - 1 != bps.begin()) {
      *(it - 1) = k;
    } else if (it == bps.end() || *it != k) {
      bps.insert(it, k);
    }
  }
  return bps;
}

namespace {

double pairwise_sum(const double* v, size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

// Hyperplane rearranged to give its crossing with axis 0.
struct Splitter {
  double inv_n0;
  Eigen::VectorXd rest;
  double offset;
};

// One axis of a (possibly truncated) box and its current cell partition.
class AxisPlan {
 public:
  AxisPlan(const Interval& iv, std::vector<double> knots, const QuadratureConfig& cfg)
      : iv_(iv), knots_(std::move(knots)), cfg_(cfg) {
    std::sort(knots_.begin(), knots_.end());
    if (iv.finite()) bps_ = axis_breakpoints(iv.lo, iv.hi, cfg.base_cells_per_axis, knots_);
  }

  bool unbounded() const { return !iv_.finite(); }
  const std::vector<double>& breakpoints() const { return bps_; }
  size_t cells() const { return bps_.size() - 1; }
  bool is_old(size_t cell) const { return cell >= old_begin_ && cell < old_end_; }

  // Moves an unbounded axis to truncation radius r; level 0 builds from scratch.
  void truncate(double r, bool first) {
    const bool inf_lo = std::isinf(iv_.lo), inf_hi = std::isinf(iv_.hi);
    const double lo = inf_lo ? (inf_hi ? -r : iv_.hi - r) : iv_.lo;
    const double hi = inf_hi ? (inf_lo ? r : iv_.lo + r) : iv_.hi;
    if (first) {
      bps_ = axis_breakpoints(lo, hi, cfg_.base_cells_per_axis, knots_);
      old_begin_ = old_end_ = 0;
      return;
    }
    const int side_cells = std::max(1, cfg_.base_cells_per_axis / 2);
    const size_t old_cells = cells();
    std::vector<double> next;
    if (inf_lo) {
      next = axis_breakpoints(lo, bps_.front(), side_cells, knots_);
      next.pop_back();
    }
    old_begin_ = next.empty() ? 0 : next.size();
    next.insert(next.end(), bps_.begin(), bps_.end());
    old_end_ = old_begin_ + old_cells;
    if (inf_hi) {
      auto ext = axis_breakpoints(bps_.back(), hi, side_cells, knots_);
      next.insert(next.end(), ext.begin() + 1, ext.end());
    }
    bps_ = std::move(next);
  }

 private:
  Interval iv_;
  std::vector<double> knots_;
  const QuadratureConfig& cfg_;
  std::vector<double> bps_;
  size_t old_begin_ = 0, old_end_ = 0;
};

// Tensor rule on one cell; axis 0 is split at every hyperplane crossing.
template <class OnNode>
void visit_cell(int dim, const double* clo, const double* chi, const GaussLegendreRule& rule,
                const std::vector<Splitter>& splitters, Eigen::VectorXd& x, std::vector<double>& cuts,
                OnNode&& on_node) {
  const int m = static_cast<int>(rule.nodes.size());
  long long outer = 1;
  for (int a = 1; a < dim; ++a) outer *= m;
  for (long long combo = 0; combo < outer; ++combo) {
    double w_outer = 1.0;
    long long c = combo;
    for (int a = 1; a < dim; ++a) {
      const int i = static_cast<int>(c % m);
      c /= m;
      const double half = 0.5 * (chi[a] - clo[a]);
      x[a] = clo[a] + half * (1.0 + rule.nodes[i]);
      w_outer *= half * rule.weights[i];
    }
    cuts.clear();
    cuts.push_back(clo[0]);
    for (const auto& s : splitters) {
      double r = s.offset;
      for (int a = 1; a < dim; ++a) r += s.rest[a - 1] * x[a];
      r = -r * s.inv_n0;
      if (r > clo[0] && r < chi[0]) cuts.push_back(r);
    }
    cuts.push_back(chi[0]);
    if (cuts.size() > 3) std::sort(cuts.begin() + 1, cuts.end() - 1);
    for (size_t s = 0; s + 1 < cuts.size(); ++s) {
      const double a = cuts[s], b = cuts[s + 1];
      if (!(b > a)) continue;
      const double half = 0.5 * (b - a);
      for (int j = 0; j < m; ++j) {
        x[0] = a + half * (1.0 + rule.nodes[j]);
        on_node(x, w_outer * half * rule.weights[j]);
      }
    }
  }
}

struct Prepared {
  std::vector<std::vector<double>> knots;
  std::vector<Splitter> splitters;
};

Prepared prepare_hints(const KinkHints& hints, int dim) {
  Prepared out;
  out.knots.resize(dim);
  if (hints.axis_knots.size() > static_cast<size_t>(dim))
    throw std::invalid_argument("kink hints name more axes than the domain has");
  for (size_t a = 0; a < hints.axis_knots.size(); ++a) out.knots[a] = hints.axis_knots[a];
  for (const auto& p : hints.planes) {
    if (p.normal.size() != dim) throw std::invalid_argument("hyperplane hint has the wrong dimension");
    const double scale = p.normal.cwiseAbs().maxCoeff();
    if (!(scale > 0)) continue;
    if (std::abs(p.normal[0]) > 1e-12 * scale) {
      out.splitters.push_back({1.0 / p.normal[0], p.normal.tail(dim - 1), p.offset});
      continue;
    }
    int nonzero = -1, count = 0;
    for (int a = 0; a < dim; ++a) {
      if (std::abs(p.normal[a]) > 1e-12 * scale) {
        nonzero = a;
        ++count;
      }
    }
    if (count == 1) out.knots[nonzero].push_back(-p.offset / p.normal[nonzero]);
  }
  return out;
}

struct LevelSums {
  double high = 0.0;
  double discretization = 0.0;
  long long cells = 0;
};

// Integrates over the cells of the current partition; with only_new set,
// cells lying entirely in the previous truncation are skipped.
LevelSums integrate_cells(const Integrand& f, const std::vector<AxisPlan>& plans,
                          const std::vector<Splitter>& splitters, const QuadratureConfig& cfg, bool only_new) {
  const int dim = static_cast<int>(plans.size());
  const auto& rule = gauss_legendre(cfg.order);
  const auto& low_rule = gauss_legendre(std::max(2, cfg.order / 2));
  std::array<size_t, 4> idx{};
  std::array<double, 4> clo{}, chi{};
  Eigen::VectorXd x(dim);
  std::vector<double> cuts;
  std::vector<double> cell_values;
  LevelSums sums;

  size_t total = 1;
  for (const auto& p : plans) total *= p.cells();
  cell_values.reserve(total);
  for (size_t flat = 0; flat < total; ++flat) {
    size_t c = flat;
    bool old = true;
    for (int a = dim - 1; a >= 0; --a) {
      idx[a] = c % plans[a].cells();
      c /= plans[a].cells();
      if (plans[a].unbounded() && !plans[a].is_old(idx[a])) old = false;
    }
    if (only_new && old) continue;
    for (int a = 0; a < dim; ++a) {
      clo[a] = plans[a].breakpoints()[idx[a]];
      chi[a] = plans[a].breakpoints()[idx[a] + 1];
    }
    double high = 0.0, low = 0.0;
    visit_cell(dim, clo.data(), chi.data(), rule, splitters, x, cuts,
               [&](const Eigen::VectorXd& p, double w) { high += w * f(p); });
    visit_cell(dim, clo.data(), chi.data(), low_rule, splitters, x, cuts,
               [&](const Eigen::VectorXd& p, double w) { low += w * f(p); });
    cell_values.push_back(high);
    sums.discretization += std::abs(high - low);
    ++sums.cells;
  }
  sums.high = pairwise_sum(cell_values.data(), cell_values.size());
  return sums;
}

std::vector<AxisPlan> make_plans(const Box& box, const Prepared& prep, const QuadratureConfig& cfg) {
  std::vector<AxisPlan> plans;
  plans.reserve(box.dim());
  for (int a = 0; a < box.dim(); ++a) plans.emplace_back(box.axes[a], prep.knots[a], cfg);
  return plans;
}

QuadratureResult integrate_box(const Integrand& f, const Box& box, const QuadratureConfig& cfg,
                               const KinkHints& hints) {
  const Prepared prep = prepare_hints(hints, box.dim());
  auto plans = make_plans(box, prep, cfg);
  const bool unbounded = std::any_of(plans.begin(), plans.end(), [](const AxisPlan& p) { return p.unbounded(); });

  QuadratureResult res;
  if (!unbounded) {
    const auto sums = integrate_cells(f, plans, prep.splitters, cfg, false);
    res.value = sums.high;
    res.abs_error_estimate = sums.discretization;
    res.cells_evaluated = sums.cells;
    return res;
  }

  std::vector<double> shells;
  double discretization = 0.0;
  for (int k = 0; k <= cfg.max_doublings; ++k) {
    const double radius = cfg.initial_radius * std::ldexp(1.0, k);
    for (auto& p : plans)
      if (p.unbounded()) p.truncate(radius, k == 0);
    const auto sums = integrate_cells(f, plans, prep.splitters, cfg, k > 0);
    shells.push_back(sums.high);
    discretization += sums.discretization;
    res.cells_evaluated += sums.cells;
    res.truncation_radius = radius;
    double total = 0.0;
    for (double s : shells) total += s;
    res.value = total;
    res.abs_error_estimate = discretization + (k > 0 ? std::abs(sums.high) : 0.0);
    if (k > 0 && std::abs(sums.high) <= std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total))) return res;
  }
  res.converged = false;
  throw NonConvergenceError("tail did not converge by radius " + std::to_string(res.truncation_radius), res);
}

}  // namespace

QuadratureResult integrate(const Integrand& f, const Domain& d, const QuadratureConfig& cfg, const KinkHints& hints) {
  cfg.validate();
  if (d.is_box()) return integrate_box(f, d.as_box(), cfg, hints);

  // (t, u) -> (t, u c |t|), Jacobian c |t|, u in (-1, 1).
  const Cone cone = d.as_cone();
  KinkHints mapped;
  mapped.axis_knots.resize(2);
  if (!hints.axis_knots.empty()) mapped.axis_knots[0] = hints.axis_knots[0];
  if (cone.two_sided) mapped.axis_knots[0].push_back(0.0);
  Box box{{cone.two_sided ? Interval{-kInf, kInf} : Interval{0.0, kInf}, Interval{-1.0, 1.0}}};
  Eigen::VectorXd y(2);
  const Integrand pulled = [&](const Eigen::Ref<const Eigen::VectorXd>& tu) {
    const double width = cone.c * std::abs(tu[0]);
    y[0] = tu[0];
    y[1] = tu[1] * width;
    return f(y) * width;
  };
  return integrate_box(pulled, box, cfg, mapped);
}

namespace {
QuadratureResult to_norm(QuadratureResult r, double p) {
  const double integral = std::max(r.value, 0.0);
  const double norm = std::pow(integral, 1.0 / p);
  r.abs_error_estimate = integral > 0 ? r.abs_error_estimate * norm / (p * integral)
                                      : std::pow(r.abs_error_estimate, 1.0 / p);
  r.value = norm;
  return r;
}

Integrand powered(const Integrand& f, double p) {
  if (p == 1.0) return [f](const Eigen::Ref<const Eigen::VectorXd>& x) { return std::abs(f(x)); };
  if (p == 2.0)
    return [f](const Eigen::Ref<const Eigen::VectorXd>& x) {
      const double v = f(x);
      return v * v;
    };
  return [f, p](const Eigen::Ref<const Eigen::VectorXd>& x) { return std::pow(std::abs(f(x)), p); };
}
}  // namespace

QuadratureResult lp_norm(const Integrand& f, const Domain& d, double p, const QuadratureConfig& cfg,
                         const KinkHints& hints) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("L^p norms need finite p >= 1");
  try {
    return to_norm(integrate(powered(f, p), d, cfg, hints), p);
  } catch (const NonConvergenceError& e) {
    throw NonConvergenceError(e.what(), to_norm(e.partial(), p));
  }
}

QuadratureResult lp_distance(const Integrand& f, const Integrand& g, const Domain& d, double p,
                             const QuadratureConfig& cfg, const KinkHints& hints) {
  const Integrand diff = [&](const Eigen::Ref<const Eigen::VectorXd>& x) { return f(x) - g(x); };
  return lp_norm(diff, d, p, cfg, hints);
}

NodeSet quadrature_nodes(const Box& box, const QuadratureConfig& cfg, const KinkHints& hints, int levels) {
  cfg.validate();
  const Prepared prep = prepare_hints(hints, box.dim());
  auto plans = make_plans(box, prep, cfg);
  for (int k = 0; k <= levels; ++k) {
    const double radius = cfg.initial_radius * std::ldexp(1.0, k);
    for (auto& p : plans)
      if (p.unbounded()) p.truncate(radius, k == 0);
  }
  const int dim = box.dim();
  const auto& rule = gauss_legendre(cfg.order);
  std::vector<double> coords;
  std::vector<double> weights;
  std::array<double, 4> clo{}, chi{};
  Eigen::VectorXd x(dim);
  std::vector<double> cuts;
  size_t total = 1;
  for (const auto& p : plans) total *= p.cells();
  for (size_t flat = 0; flat < total; ++flat) {
    size_t c = flat;
    for (int a = dim - 1; a >= 0; --a) {
      const size_t i = c % plans[a].cells();
      c /= plans[a].cells();
      clo[a] = plans[a].breakpoints()[i];
      chi[a] = plans[a].breakpoints()[i + 1];
    }
    visit_cell(dim, clo.data(), chi.data(), rule, prep.splitters, x, cuts, [&](const Eigen::VectorXd& p, double w) {
      coords.insert(coords.end(), p.data(), p.data() + dim);
      weights.push_back(w);
    });
  }
  NodeSet nodes;
  nodes.points = Eigen::Map<Eigen::MatrixXd>(coords.data(), dim, static_cast<Eigen::Index>(weights.size()));
  nodes.weights = Eigen::Map<Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  return nodes;
}

}  // namespace ridgelab
