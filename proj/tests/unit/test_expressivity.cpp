#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "ridgelab/constructors.hpp"
#include "ridgelab/expressivity.hpp"
#include "ridgelab/serialization.hpp"

using namespace ridgelab;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd x(v.size());
  int i = 0;
  for (double d : v) x[i++] = d;
  return x;
}
ShallowNetd single(const Activationd& a, const Eigen::VectorXd& y, double rho = 0.0) {
  return ShallowNetd(2, a, 0.0, {{1.0, y, rho}});
}
double gaussian(const Eigen::Ref<const Eigen::VectorXd>& x) { return std::exp(-x.squaredNorm()); }
}  // namespace

TEST_CASE("growth of a single ReLU ridge") {
  const auto g = ridge_norm_growth(single(Activationd::relu(), vec({1, 0})), {1, 2, 4}, 1.0);
  REQUIRE(g.norms.size() == 3);
  // Oracle: int_0^R x dx over the x-range times the height R.
  for (size_t i = 0; i < 3; ++i) CHECK(g.norms[i] == doctest::Approx(std::pow(g.radii[i], 3) / 2).epsilon(1e-3));
  CHECK(g.domain_family == "[-R,R]x[0,R]");
}

TEST_CASE("growth of the zero net") {
  const auto g = ridge_norm_growth(ShallowNetd(2, Activationd::relu()), {1, 2, 4}, 2.0);
  for (double v : g.norms) CHECK(v == 0.0);
  CHECK_FALSE(grows_at_least(g, 1.5));
}

TEST_CASE("growth of a logistic ridge is quadratic") {
  const auto g = ridge_norm_growth(single(Activationd::logistic(), vec({0, 1})), {16, 32, 64}, 1.0);
  CHECK(g.norms[2] / g.norms[1] == doctest::Approx(4.0).epsilon(0.1));
  CHECK(g.norms[1] / g.norms[0] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("growth input checks") {
  const auto net = single(Activationd::relu(), vec({1, 0}));
  CHECK_THROWS_AS(ridge_norm_growth(net, {2, 1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ridge_norm_growth(net, {0, 1}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ridge_norm_growth(ShallowNetd(3, Activationd::relu()), {1}, 1.0), std::invalid_argument);
}

TEST_CASE("grows_at_least compares against the per-doubling floor") {
  GrowthProfile g{{1, 2, 8}, {1, 1.6, 1.6 * 2.3}, 1.0, ""};
  CHECK(grows_at_least(g, 1.5));
  // A quadrupling needs 1.5^2 = 2.25; 2.3 passes, 2.2 does not.
  g.norms[2] = 1.6 * 2.2;
  CHECK_FALSE(grows_at_least(g, 1.5));
  g.norms = {1, 1, 5};
  CHECK_FALSE(grows_at_least(g, 0.5));
}

TEST_CASE("cone example") {
  CHECK(std::abs(cone_example_integral(1, false).value) < 1e-9);
  CHECK(std::abs(cone_example_integral(1, true).value - 2.0) < 1e-3);
  CHECK(std::abs(cone_example_integral(3, true).value - 6.0) < 1e-3);
  CHECK_THROWS(cone_example_integral(0, true));
}

TEST_CASE("property: ridge persistence on nested boxes") {
  gen::Rng rng(5);
  QuadratureConfig cfg;
  cfg.base_cells_per_axis = 16;
  const Activationd acts[] = {Activationd::relu(), Activationd::logistic(), Activationd::elu(), Activationd::softplus(),
                              Activationd::leaky_relu()};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Neuron<double>> neurons;
    for (int k = 0; k < 3; ++k) neurons.push_back({gen::uniform(rng, -2, 2), gen::point(rng, 2, -1, 1), gen::uniform(rng, -2, 2)});
    const ShallowNetd net(2, acts[trial % 5], gen::uniform(rng, -0.5, 0.5), neurons);
    const double r = gen::uniform(rng, 0.5, 3);
    const auto g = ridge_norm_growth(net, {r, 2 * r}, trial % 2 ? 2.0 : 1.0, cfg);
    if (g.norms[0] > 1e-6) CHECK(g.norms[1] >= g.norms[0] * (1 - 1e-9));
  }
}

TEST_CASE("property: a single nonzero unit diverges along the doubling schedule") {
  gen::Rng rng(7);
  for (const auto& a : {Activationd::relu(), Activationd::logistic(), Activationd::elu(), Activationd::softplus(),
                        Activationd::leaky_relu()}) {
    for (int trial = 0; trial < 3; ++trial) {
      const double theta = gen::uniform(rng, 0, 2 * M_PI);
      const auto net = single(a, vec({std::cos(theta), std::sin(theta)}), gen::uniform(rng, -1, 1));
      // A unit that fades across the half-plane still grows linearly along
      // the boundary; the default schedule runs to 16 to clear a factor of 10.
      const auto g = ridge_norm_growth(net, kDefaultGrowthRadii, 1.0);
      CHECK(g.norms.back() > 10 * g.norms.front());
    }
  }
}

TEST_CASE("probe dictionary") {
  ProbeConfig probe;
  probe.neurons = 10;
  const auto d = probe_dictionary(Activationd::relu(), probe);
  REQUIRE(d.neurons().size() == 10);
  for (const auto& n : d.neurons()) CHECK(n.weight.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d.neurons().front().bias == doctest::Approx(4.0 - 0.4));
  CHECK(d.neurons().back().bias == doctest::Approx(-4.0 + 0.4));
  probe.seed = 1;
  const auto other = probe_dictionary(Activationd::relu(), probe);
  CHECK(other.neurons()[0].weight != d.neurons()[0].weight);
}

TEST_CASE("probe config validation") {
  ProbeConfig probe;
  probe.outer_radii = {4, 8};
  CHECK_THROWS_AS(probe.validate(), std::invalid_argument);
  probe.outer_radii = {16, 8};
  CHECK_THROWS_AS(probe.validate(), std::invalid_argument);
  probe = {};
  probe.neurons = 0;
  CHECK_THROWS_AS(probe.validate(), std::invalid_argument);
}

TEST_CASE("probe of the zero target") {
  const auto r = fit_and_probe([](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.0; }, Activationd::relu(), {});
  CHECK(r.verdict == Verdict::NetVanishes);
  CHECK(r.inner_residual == 0.0);
  CHECK(verdict_name(r.verdict) == "net_vanishes");
}

TEST_CASE("probe of the Gaussian with ReLU") {
  const ProbeConfig probe;
  const auto r = fit_and_probe(gaussian, Activationd::relu(), probe);
  CHECK(r.verdict == Verdict::ConsistentWithInexpressivity);
  CHECK(r.inner_residual < probe.fit_fraction * r.target_inner_norm);
  CHECK(grows_at_least(r.outer_norms, probe.growth_floor));
  CHECK(r.net.neurons().size() == 100);

  SUBCASE("identical inputs give identical reports") {
    const auto again = fit_and_probe(gaussian, Activationd::relu(), probe);
    CHECK(to_json(again).dump() == to_json(r).dump());
  }
  SUBCASE("the verdict follows the thresholds") {
    ProbeConfig strict = probe;
    strict.growth_floor = 1e6;
    CHECK(fit_and_probe(gaussian, Activationd::relu(), strict).verdict == Verdict::Inconclusive);
    ProbeConfig picky = probe;
    picky.fit_fraction = 1e-6;
    CHECK(fit_and_probe(gaussian, Activationd::relu(), picky).verdict == Verdict::Inconclusive);
  }
}

TEST_CASE("contrast: lifted bumps on a strip are approximable") {
  // On R x [0,1] the same kind of target is reachable by shallow nets.
  const auto g = bump_1d();
  KinkHints knots;
  knots.axis_knots = {{0.0, 1.0, 2.0}};
  ShallowFitOptions opt;
  opt.knots = ShallowFitOptions::even_knots(-6, 6, 25);
  QuadratureConfig cfg;
  cfg.base_cells_per_axis = 16;
  const auto fine = build_lifted_approximator(as_integrand(g), vec({1, 0.3}), Activationd::logistic(), opt, 2.0, cfg, knots);
  CHECK(fine.report.relative_residual < 0.05);

  // A coarse dictionary keeps the residual well above the rounding floor,
  // where the lifted and 1-D residuals can be compared.
  opt.dictionary_size = 24;
  opt.knots = ShallowFitOptions::even_knots(-3, 3, 8);
  const auto fit = build_lifted_approximator(as_integrand(g), vec({2, 0.3}), Activationd::logistic(), opt, 2.0, {}, knots);
  CHECK(fit.ratio == doctest::Approx(fit.expected_ratio).epsilon(1e-3));
  CHECK(fit.expected_ratio == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
}
