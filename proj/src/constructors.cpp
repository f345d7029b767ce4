#include "ridgelab/constructors.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <stdexcept>

namespace ridgelab {

namespace {

double relu(double v) { return v > 0 ? v : 0.0; }
double tent(double v) { return relu(v) - 2.0 * relu(v - 1.0) + relu(v - 2.0); }

double safe_ratio(double num, double den) {
  if (den > 0) return num / den;
  return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

// Integral of |target|^p over R^n outside `region` (zero when the space is the region).
double tail_outside(const Integrand& target, const Box& region, double p, const QuadratureConfig& cfg,
                    const KinkHints& target_hints) {
  const int n = region.dim();
  KinkHints hints = target_hints;
  hints.axis_knots.resize(n);
  for (int i = 0; i < n; ++i) {
    hints.axis_knots[i].push_back(region.axes[i].lo);
    hints.axis_knots[i].push_back(region.axes[i].hi);
  }
  const Integrand outside = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
    bool inside = true;
    for (int i = 0; i < n && inside; ++i) inside = x[i] >= region.axes[i].lo && x[i] <= region.axes[i].hi;
    return inside ? 0.0 : std::pow(std::abs(target(x)), p);
  };
  return integrate(outside, Domain::box(std::vector<Interval>(n, {-kInf, kInf})), cfg, hints).value;
}

struct Solution {
  Eigen::VectorXd x;
  double condition = 1.0;
  bool regularized = false;
};

Solution solve_sparse_normal_equations(const Eigen::SparseMatrix<double>& gram, const Eigen::VectorXd& rhs) {
  Solution out;
  if (rhs.isZero(0.0)) {
    out.x = Eigen::VectorXd::Zero(rhs.size());
  }
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(gram);
  bool singular = ldlt.info() != Eigen::Success;
  if (!singular) {
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    out.condition = safe_ratio(d.maxCoeff(), d.minCoeff());
    singular = ldlt.vectorD().minCoeff() <= 1e-13 * d.maxCoeff();
  }
  if (singular) {
    const double lambda = 1e-10 * gram.diagonal().sum();
    Eigen::SparseMatrix<double> id(gram.rows(), gram.cols());
    id.setIdentity();
    ldlt.compute(gram + lambda * id);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("regularized normal equations failed");
    const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
    out.condition = safe_ratio(d.maxCoeff(), d.minCoeff());
    out.regularized = true;
  }
  if (out.x.size() == 0) out.x = ldlt.solve(rhs);
  return out;
}

}  // namespace

DeepReluNetd bump_1d() {
  Eigen::MatrixXd w1(3, 1), w2(1, 3);
  Eigen::VectorXd b1(3), b2(1);
  w1 << 1, 1, 1;
  b1 << 0, -1, -2;
  w2 << 1, -2, 1;
  b2 << 0;
  return DeepReluNetd::from_dense({{w1, b1}, {w2, b2}});
}

DeepReluNetd bump_nd(int n) {
  if (n < 1) throw std::invalid_argument("bump dimension must be positive");
  // Hidden layer 1: ReLU(x_i), ReLU(x_i - 1), ReLU(x_i - 2) per axis.
  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(3 * n, n);
  Eigen::VectorXd b1(3 * n);
  // Hidden layer 2: ReLU(s), ReLU(s - 1), ReLU(s - 2) with s = sum_i G(x_i) - (n - 1).
  Eigen::MatrixXd w2(3, 3 * n);
  Eigen::VectorXd b2(3);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      w1(3 * i + k, i) = 1.0;
      b1[3 * i + k] = -k;
    }
    w2.block(0, 3 * i, 3, 3).rowwise() = Eigen::RowVector3d(1, -2, 1);
  }
  b2 << -(n - 1.0), -(n - 1.0) - 1.0, -(n - 1.0) - 2.0;
  Eigen::MatrixXd w3(1, 3);
  w3 << 1, -2, 1;
  return DeepReluNetd::from_dense({{w1, b1}, {w2, b2}, {w3, Eigen::VectorXd::Zero(1)}});
}

DeepReluNetd family_member(int n, const Eigen::VectorXd& corner, double sigma, double t) {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  if (corner.size() != n) throw std::invalid_argument("corner must have length n");
  const AffineMap<double> to_unit{Eigen::MatrixXd::Identity(n, n) / sigma, -corner / sigma};
  return scale_output(affine_precompose(bump_nd(n), to_unit), t);
}

// ---------------------------------------------------------------------------

BumpLattice::BumpLattice(const Box& box, double sigma, int density) : sigma_(sigma), density_(density) {
  if (!(sigma > 0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
  if (density < 1) throw std::invalid_argument("lattice density must be >= 1");
  if (!box.finite()) throw std::invalid_argument("the grid box must be finite on every axis");
  if (box.dim() < 1 || box.dim() > 4) throw std::invalid_argument("grid dimension must be in [1, 4]");
  spacing_ = sigma / density;
  origin_.resize(box.dim());
  size_ = 1;
  for (int i = 0; i < box.dim(); ++i) {
    const double len = box.axes[i].hi - box.axes[i].lo;
    origin_[i] = box.axes[i].lo;
    counts_.push_back(std::max<long long>(1, static_cast<long long>(std::ceil(len / spacing_ - 1e-9))));
    size_ *= counts_.back();
  }
}

Eigen::VectorXd BumpLattice::center(long long index) const {
  Eigen::VectorXd c(dim());
  for (int i = dim() - 1; i >= 0; --i) {
    c[i] = origin_[i] + (static_cast<double>(index % counts_[i]) + 0.5) * spacing_;
    index /= counts_[i];
  }
  return c;
}

Box BumpLattice::support_box() const {
  Box b;
  for (int i = 0; i < dim(); ++i)
    b.axes.push_back({origin_[i] + 0.5 * spacing_ - sigma_, origin_[i] + (counts_[i] - 0.5) * spacing_ + sigma_});
  return b;
}

double BumpLattice::member_value(long long index, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd z = corner(index);
  double s = -(dim() - 1.0);
  for (int i = 0; i < dim(); ++i) s += tent((x[i] - z[i]) / sigma_);
  return tent(s);
}

double BumpLattice::evaluate(const Eigen::VectorXd& coefficients, const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double sum = 0.0;
  for_each_active(x, [&](long long j, double v) { sum += coefficients[j] * v; });
  return sum;
}

double BumpLattice::partition_sum() const {
  // Sum over an unbounded lattice of F at the offsets seen from one lattice point.
  const int n = dim();
  const int reach = 2 * density_ - 1;
  const int width = 2 * reach + 1;
  long long total = 1;
  for (int i = 0; i < n; ++i) total *= width;
  double sum = 0.0;
  for (long long combo = 0; combo < total; ++combo) {
    long long c = combo;
    double s = -(n - 1.0);
    for (int i = 0; i < n; ++i) {
      s += tent(1.0 + static_cast<double>(c % width - reach) / density_);
      c /= width;
    }
    sum += tent(s);
  }
  return sum;
}

std::vector<GridSpec> refinement_schedule(const Box& box, const std::vector<double>& sigmas, FitMode mode,
                                          int base_density) {
  if (sigmas.empty()) throw std::invalid_argument("refinement schedule needs at least one sigma");
  if (base_density < 1) throw std::invalid_argument("base density must be >= 1");
  std::vector<GridSpec> out;
  for (size_t k = 0; k < sigmas.size(); ++k) {
    if (!(sigmas[k] > 0)) throw std::invalid_argument("sigma must be positive");
    if (k > 0 && !(sigmas[k] < sigmas[k - 1])) throw std::invalid_argument("schedule sigmas must decrease");
    const double d = base_density * std::sqrt(sigmas.front() / sigmas[k]);
    out.push_back({box, sigmas[k], mode, static_cast<int>(std::ceil(d - 1e-9))});
  }
  return out;
}

KinkHints BumpLattice::hints(const Box& region) const {
  const int n = dim();
  KinkHints h;
  h.axis_knots.resize(n);
  // Every member creases on the axis planes through its center and at center +- sigma.
  for (int i = 0; i < n; ++i) {
    const auto k0 = static_cast<long long>(std::floor((region.axes[i].lo - origin_[i]) / spacing_ - 0.5));
    const auto k1 = static_cast<long long>(std::ceil((region.axes[i].hi - origin_[i]) / spacing_ - 0.5));
    for (long long k = k0; k <= k1; ++k) {
      const double v = origin_[i] + spacing_ * (k + 0.5);
      if (v > region.axes[i].lo && v < region.axes[i].hi) h.axis_knots[i].push_back(v);
    }
  }
  if (n < 2) return h;
  // Pyramid faces sum_i s_i x_i = h k + sum_i s_i (origin_i + h / 2), s_0 = +1, h the spacing.
  for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
    Eigen::VectorXd s(n);
    s[0] = 1.0;
    for (int i = 1; i < n; ++i) s[i] = (mask >> (i - 1)) & 1 ? -1.0 : 1.0;
    double shift = 0.0, dmin = 0.0, dmax = 0.0;
    for (int i = 0; i < n; ++i) {
      shift += s[i] * (origin_[i] + 0.5 * spacing_);
      dmin += s[i] > 0 ? region.axes[i].lo : -region.axes[i].hi;
      dmax += s[i] > 0 ? region.axes[i].hi : -region.axes[i].lo;
    }
    const auto k0 = static_cast<long long>(std::ceil((dmin - shift) / spacing_));
    const auto k1 = static_cast<long long>(std::floor((dmax - shift) / spacing_));
    for (long long k = k0; k <= k1; ++k) h.planes.push_back({s, -(spacing_ * k + shift)});
  }
  return h;
}

DeepReluNetd BumpLattice::assemble(const Eigen::VectorXd& coefficients) const {
  if (coefficients.size() != size_) throw std::invalid_argument("one coefficient per lattice member expected");
  std::vector<DeepReluNetd> members;
  members.reserve(size_);
  for (long long j = 0; j < size_; ++j) members.push_back(family_member(dim(), corner(j), sigma_, coefficients[j]));
  return net_sum(std::span<const DeepReluNetd>(members));
}

// ---------------------------------------------------------------------------

Depth3Approximation build_depth3_approximator(const Integrand& target, const GridSpec& grid, double p,
                                              const QuadratureConfig& cfg, const KinkHints& target_hints) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and >= 1");
  const BumpLattice lattice(grid.box, grid.sigma, grid.density);
  const Box region = lattice.support_box();
  KinkHints hints = lattice.hints(region);
  hints.merge(target_hints);
  const long long q = lattice.size();
  const int n = lattice.dim();

  FitReport report;
  report.p = p;
  report.dictionary_size = q;
  Eigen::VectorXd coeffs(q);
  if (grid.mode == FitMode::Sample) {
    const double mass = lattice.partition_sum();
    for (long long j = 0; j < q; ++j) coeffs[j] = target(lattice.center(j)) / mass;
  } else {
    // Members overlap only with lattice neighbours closer than 2 * density on
    // every axis, so the Gram matrix is stored as one stencil row per member.
    const NodeSet nodes = quadrature_nodes(region, cfg, hints);
    const int reach = 2 * lattice.density() - 1;
    const int width = 2 * reach + 1;
    long long stencil = 1;
    for (int i = 0; i < n; ++i) stencil *= width;
    const auto multi_index = [&](long long index, long long* out) {
      for (int i = n - 1; i >= 0; --i) {
        out[i] = index % lattice.count(i);
        index /= lattice.count(i);
      }
    };
    std::vector<double> band(static_cast<size_t>(q * stencil), 0.0);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(q);
    struct Active {
      long long index;
      long long pos[4];
      double value;
    };
    std::vector<Active> active;
    for (Eigen::Index k = 0; k < nodes.size(); ++k) {
      const auto x = nodes.points.col(k);
      active.clear();
      lattice.for_each_active(x, [&](long long j, double v) {
        if (v == 0.0) return;
        Active a{j, {}, v};
        multi_index(j, a.pos);
        active.push_back(a);
      });
      if (active.empty()) continue;
      const double w = nodes.weights[k];
      const double f = target(x);
      for (const auto& a : active) {
        rhs[a.index] += w * a.value * f;
        for (const auto& b : active) {
          long long slot = 0;
          for (int i = 0; i < n; ++i) slot = slot * width + (b.pos[i] - a.pos[i] + reach);
          band[static_cast<size_t>(a.index * stencil + slot)] += w * a.value * b.value;
        }
      }
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (long long row = 0; row < q; ++row) {
      long long pos[4];
      multi_index(row, pos);
      for (long long slot = 0; slot < stencil; ++slot) {
        const double v = band[static_cast<size_t>(row * stencil + slot)];
        if (v == 0.0) continue;
        long long col = 0, rest = slot, off[4];
        for (int i = n - 1; i >= 0; --i) {
          off[i] = rest % width - reach;
          rest /= width;
        }
        for (int i = 0; i < n; ++i) col = col * lattice.count(i) + pos[i] + off[i];
        trips.emplace_back(row, col, v);
      }
    }
    band = {};
    Eigen::SparseMatrix<double> gram(q, q);
    gram.setFromTriplets(trips.begin(), trips.end());
    const Solution sol = solve_sparse_normal_equations(gram, rhs);
    coeffs = sol.x;
    report.condition_estimate = sol.condition;
    report.regularized = sol.regularized;
  }
  report.coefficients = coeffs;

  const Integrand residual = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return std::pow(std::abs(target(x) - lattice.evaluate(coeffs, x)), p);
  };
  const double inside = integrate(residual, Domain::box(region.axes), cfg, hints).value;
  const double outside = tail_outside(target, region, p, cfg, target_hints);
  report.residual_lp = std::pow(inside + outside, 1.0 / p);
  report.target_norm =
      lp_norm(target, Domain::box(std::vector<Interval>(n, {-kInf, kInf})), p, cfg, target_hints).value;
  report.relative_residual = safe_ratio(report.residual_lp, report.target_norm);

  Depth3Approximation out{lattice.assemble(coeffs), std::move(report), Eigen::MatrixXd(n, q), grid.sigma};
  for (long long j = 0; j < q; ++j) out.corners.col(j) = lattice.corner(j);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> ShallowFitOptions::scales() {
  std::vector<double> s;
  for (int j = -2; j <= 5; ++j) s.push_back(std::ldexp(1.0, j));
  return s;
}

std::vector<double> ShallowFitOptions::even_knots(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("knot count must be positive");
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> k(count);
  for (int i = 0; i < count; ++i) k[i] = lo + (hi - lo) * i / (count - 1);
  return k;
}

int integrable_difference_order(const Activationd& activation) {
  const auto limits = asymptotes(activation);
  return limits.bounded() ? 1 : 2;
}

namespace {

struct Dictionary1d {
  const Activationd& phi;
  int order;
  std::vector<double> weights;
  std::vector<std::pair<double, double>> members;  // (scale, knot)

  double unit(size_t k, double x) const {
    const auto [a, c] = members[k];
    const double v = a * (x - c) - 0.5 * order;
    double s = 0.0;
    for (int i = 0; i <= order; ++i) s += weights[i] * phi(v + i);
    return s;
  }
};

}  // namespace

ShallowApproximation build_shallow_1d(const Integrand& target, const Activationd& activation,
                                      const ShallowFitOptions& options, double p, const QuadratureConfig& cfg,
                                      const KinkHints& target_hints) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and >= 1");
  if (options.dictionary_size < 1) throw std::invalid_argument("dictionary size must be >= 1");
  if (options.knots.empty()) throw std::invalid_argument("at least one knot is required");
  const auto scales = ShallowFitOptions::scales();
  const size_t k_total = static_cast<size_t>(options.dictionary_size);
  if (k_total > scales.size() * options.knots.size())
    throw std::invalid_argument("dictionary size exceeds scales x knots");

  const int order = integrable_difference_order(activation);
  Dictionary1d dict{activation, order, difference_weights(order), {}};
  for (double a : scales)
    for (double c : options.knots)
      if (dict.members.size() < k_total) dict.members.emplace_back(a, c);

  KinkHints hints = target_hints;
  if (activation.has_kink()) {
    hints.axis_knots.resize(1);
    for (const auto& [a, c] : dict.members)
      for (int i = 0; i <= order; ++i) hints.axis_knots[0].push_back(c + (0.5 * order - i) / a);
  }

  // Truncate far enough that the widest unit has decayed below double precision.
  double reach = 0.0, min_scale = scales.back();
  for (const auto& [a, c] : dict.members) {
    reach = std::max(reach, std::abs(c));
    min_scale = std::min(min_scale, a);
  }
  reach += 40.0 / min_scale;
  int levels = 0;
  while (cfg.initial_radius * std::ldexp(1.0, levels) < reach && levels < cfg.max_doublings) ++levels;
  const NodeSet nodes = quadrature_nodes(Box{{{-kInf, kInf}}}, cfg, hints, levels);

  const auto nk = static_cast<Eigen::Index>(k_total);
  FitReport report;
  report.p = p;
  report.dictionary_size = nk;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(nk);
  if (options.mode == FitMode::Sample) {
    // Riemann-sum quasi-interpolant on the scale best matched to the knot spacing.
    double h = 1.0;
    if (options.knots.size() > 1)
      h = (options.knots.back() - options.knots.front()) / static_cast<double>(options.knots.size() - 1);
    h = std::abs(h) > 0 ? std::abs(h) : 1.0;
    double best = scales.front();
    for (const auto& [a, c] : dict.members)
      if (std::abs(std::log(a * h)) < std::abs(std::log(best * h))) best = a;
    for (Eigen::Index k = 0; k < nk; ++k) {
      if (dict.members[k].first != best) continue;
      double mass = 0.0;
      for (Eigen::Index i = 0; i < nodes.size(); ++i) mass += nodes.weights[i] * dict.unit(k, nodes.points(0, i));
      const double c = dict.members[k].second;
      coeffs[k] = mass != 0.0 ? target(Eigen::VectorXd::Constant(1, c)) * h / mass : 0.0;
    }
    report.condition_estimate = 1.0;
  } else {
    // Rank-revealing least squares on the square-root-weighted design matrix.
    Eigen::MatrixXd design(nodes.size(), nk);
    Eigen::VectorXd rhs(nodes.size());
    for (Eigen::Index i = 0; i < nodes.size(); ++i) {
      const double sw = std::sqrt(nodes.weights[i]);
      const double x = nodes.points(0, i);
      for (Eigen::Index k = 0; k < nk; ++k) design(i, k) = sw * dict.unit(k, x);
      rhs[i] = sw * target(nodes.points.col(i));
    }
    if (!rhs.isZero(0.0)) {
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
      coeffs = cod.solve(rhs);
      const auto rank = cod.rank();
      const auto& t = cod.matrixT();
      report.condition_estimate = rank > 0 ? safe_ratio(std::abs(t(0, 0)), std::abs(t(rank - 1, rank - 1))) : 1.0;
      report.regularized = rank < nk;
    }
  }
  report.coefficients = coeffs;

  std::vector<Neuron<double>> neurons;
  for (Eigen::Index k = 0; k < nk; ++k) {
    if (coeffs[k] == 0.0) continue;
    const auto [a, c] = dict.members[k];
    for (int i = 0; i <= order; ++i)
      neurons.push_back({coeffs[k] * dict.weights[i], Eigen::VectorXd::Constant(1, a), -a * c - 0.5 * order + i});
  }
  ShallowNetd net(1, activation, 0.0, std::move(neurons));

  KinkHints residual_hints = kink_hints(net);
  residual_hints.merge(target_hints);
  const Domain line = Domain::line_times_unit_cube(0);
  report.residual_lp = lp_distance(target, as_integrand(net), line, p, cfg, residual_hints).value;
  report.target_norm = lp_norm(target, line, p, cfg, target_hints).value;
  report.relative_residual = safe_ratio(report.residual_lp, report.target_norm);
  return {std::move(net), std::move(report), std::move(dict.members), order};
}

LiftedApproximation build_lifted_approximator(const Integrand& gamma, const Eigen::VectorXd& y,
                                              const Activationd& activation, const ShallowFitOptions& options,
                                              double p, const QuadratureConfig& cfg, const KinkHints& gamma_hints) {
  if (y.size() < 1) throw std::invalid_argument("lifting direction must be nonempty");
  if (y[0] == 0.0) throw std::invalid_argument("lifting needs y_0 != 0");
  if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("lifted approximation needs 2 <= p < inf");
  if (y.size() > 4) throw std::invalid_argument("lifted domains above dimension 4 are not supported");

  auto fit = build_shallow_1d(gamma, activation, options, p, cfg, gamma_hints);
  ShallowNetd lifted = lift_ridge(fit.net, y);

  const Integrand lifted_target = [&](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return gamma(Eigen::VectorXd::Constant(1, y.dot(x)));
  };
  KinkHints hints = kink_hints(lifted);
  if (!gamma_hints.axis_knots.empty())
    for (double s : gamma_hints.axis_knots[0]) hints.planes.push_back({y, -s});

  const Domain omega = Domain::line_times_unit_cube(static_cast<int>(y.size()) - 1);
  FitReport report = fit.report;
  report.residual_lp = lp_distance(lifted_target, as_integrand(lifted), omega, p, cfg, hints).value;
  KinkHints target_only;
  target_only.planes.assign(hints.planes.end() - (gamma_hints.axis_knots.empty() ? 0 : gamma_hints.axis_knots[0].size()),
                            hints.planes.end());
  report.target_norm = lp_norm(lifted_target, omega, p, cfg, target_only).value;
  report.relative_residual = safe_ratio(report.residual_lp, report.target_norm);

  LiftedApproximation out{fit.net, std::move(lifted), std::move(report), fit.report.residual_lp, 0.0,
                          std::pow(std::abs(y[0]), -1.0 / p)};
  out.ratio = safe_ratio(out.report.residual_lp, out.residual_1d);
  return out;
}

}  // namespace ridgelab
