#include <cmath>
#include <functional>
#include <random>

#include "ridgelab/cli.hpp"
#include "ridgelab/constructors.hpp"
#include "ridgelab/difference_integral.hpp"
#include "ridgelab/errors.hpp"

namespace ridgelab::cli {

namespace {

const std::vector<std::string> kGroups{"difference", "limits", "bump", "lifting"};

std::string num(double v) { return format_double(v); }

struct Suite {
  std::vector<LemmaCheck> checks;
  std::string group;

  void add(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    LemmaCheck c{group, name, false, ""};
    try {
      auto [ok, detail] = body();
      c.passed = ok;
      c.detail = std::move(detail);
    } catch (const std::exception& e) {
      c.detail = std::string("error: ") + e.what();
    }
    checks.push_back(std::move(c));
  }
};

// Every built-in, or a deliberately wrong ReLU when the fault hook is on.
std::vector<Activationd> unbounded_activations(bool broken) {
  Activationd relu = Activationd::relu();
  if (broken)
    relu = Activationd::custom([](double x) { return x > 0 ? 1.5 * x : 0.0; }, asymptotes(Activationd::relu()), "relu");
  return {relu, Activationd::elu(), Activationd::softplus(), Activationd::leaky_relu(0.1)};
}

std::string name_of(const Activationd& a) {
  return a.kind() == ActivationKind::Custom ? a.label() : std::string(activation_name(a.kind()));
}

void difference_group(Suite& s, bool broken) {
  for (double rho : {0.5, 1.0, 2.5}) {
    s.add("integral logistic rho=" + num(rho), [rho] {
      const double v = difference_integral({Activationd::logistic(), 1, rho}).value;
      return std::pair{std::abs(v - rho) < 1e-6, "value " + num(v)};
    });
  }
  auto all = unbounded_activations(broken);
  all.push_back(Activationd::logistic());
  for (const auto& a : all) {
    s.add("binomial expansion " + name_of(a), [a] {
      std::mt19937_64 rng(11);
      std::uniform_real_distribution<double> ux(-5, 5), ustep(0.1, 2);
      double worst = 0;
      for (int trial = 0; trial < 200; ++trial) {
        const int order = 1 + trial % 4;
        const double x = ux(rng), step = ustep(rng);
        const auto w = difference_weights(order);
        double expanded = 0;
        for (int k = 0; k <= order; ++k) expanded += w[k] * a(x + k * step);
        const double recursive = difference_eval(DifferenceUnit<double>{a, order, step}, x);
        worst = std::max(worst, std::abs(recursive - expanded) / std::max(1.0, std::abs(expanded)));
      }
      return std::pair{worst < 1e-12, "max deviation " + num(worst)};
    });
  }
}

void limits_group(Suite& s, bool broken) {
  for (const auto& a : unbounded_activations(broken)) {
    const double lo_expected = a.kind() == ActivationKind::LeakyReLU ? a.alpha() : 0.0;
    s.add("first difference limits " + name_of(a), [a, lo_expected] {
      const DifferenceUnit<double> u{a, 1, 1.0};
      const double hi = difference_eval(u, 50.0), lo = difference_eval(u, -50.0);
      const bool ok = std::abs(hi - 1.0) < 1e-6 && std::abs(lo - lo_expected) < 1e-6;
      return std::pair{ok, "(-50, 50) -> (" + num(lo) + ", " + num(hi) + ")"};
    });
  }
  auto all = unbounded_activations(broken);
  all.push_back(Activationd::logistic());
  for (const auto& a : all) {
    s.add("asymptote table " + name_of(a), [a] {
      const auto t = asymptotes(a);
      const double far = 60.0;
      const double plus = a(far) - t.beta_plus * far, minus = a(-far) + t.beta_minus * far;
      const bool ok = std::abs(plus - t.alpha_plus) < 1e-6 && std::abs(minus - t.alpha_minus) < 1e-6;
      return std::pair{ok, "intercepts " + num(minus) + ", " + num(plus)};
    });
  }
}

void bump_group(Suite& s) {
  const auto g = bump_1d();
  const auto at = [&g](double x) { return deep_eval(g, Eigen::VectorXd::Constant(1, x)); };
  s.add("G(1) = 1", [&] { return std::pair{at(1.0) == 1.0, "G(1) = " + num(at(1.0))}; });
  s.add("G(0.5) = 0.5", [&] { return std::pair{at(0.5) == 0.5, "G(0.5) = " + num(at(0.5))}; });
  s.add("G vanishes outside [0,2]", [&] {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-20, 22);
    double worst = 0;
    for (int i = 0; i < 10000;) {
      const double x = u(rng);
      if (x >= 0 && x <= 2) continue;
      worst = std::max(worst, std::abs(at(x)));
      ++i;
    }
    return std::pair{worst == 0.0, "max |G| " + num(worst)};
  });
  s.add("integral of G = 1", [&] {
    KinkHints h;
    h.axis_knots = {{0.0, 1.0, 2.0}};
    const double v = integrate(as_integrand(g), Domain::box({{-kInf, kInf}}), {}, h).value;
    return std::pair{std::abs(v - 1.0) < 1e-9, "integral " + num(v)};
  });
  for (int n = 1; n <= 3; ++n) {
    s.add("F identities n=" + std::to_string(n), [n] {
      const auto f = bump_nd(n);
      std::mt19937_64 rng(6 + n);
      std::uniform_real_distribution<double> u(-2, 4);
      double worst = 0;
      for (int i = 0; i < 10000;) {
        Eigen::VectorXd x(n);
        for (int k = 0; k < n; ++k) x[k] = u(rng);
        if ((x.array() >= 0).all() && (x.array() <= 2).all()) continue;
        worst = std::max(worst, std::abs(deep_eval(f, x)));
        ++i;
      }
      const double peak = deep_eval(f, Eigen::VectorXd::Ones(n));
      const bool ok = peak == 1.0 && worst == 0.0 && f.depth() == 3;
      return std::pair{ok, "peak " + num(peak) + ", max outside " + num(worst) + ", depth " + std::to_string(f.depth())};
    });
  }
}

void lifting_group(Suite& s) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coef(-2, 2), scale(0.5, 3), shift(-3, 3), mag(0.3, 2), other(-2, 2);
  QuadratureConfig cfg;
  cfg.base_cells_per_axis = 8;
  for (int trial = 0; trial < 4; ++trial) {
    const double p = trial % 2 == 0 ? 2.0 : 3.0;
    const int n = trial < 2 ? 1 : 2;
    std::vector<Neuron<double>> neurons;
    for (int k = 0; k < 2; ++k) {
      const double c = coef(rng), a = scale(rng), b = shift(rng);
      for (int j = 0; j < 3; ++j) neurons.push_back({c * (j == 1 ? -2.0 : 1.0), Eigen::VectorXd::Constant(1, a), -a * b - j});
    }
    const ShallowNetd gamma(1, Activationd::relu(), 0.0, neurons);
    Eigen::VectorXd y(n + 1);
    y[0] = (trial % 3 == 0 ? -1.0 : 1.0) * mag(rng);
    for (int i = 1; i <= n; ++i) y[i] = other(rng);
    s.add("norm scaling p=" + num(p) + " n=" + std::to_string(n), [gamma, y, p, n, cfg] {
      const ShallowNetd lifted = lift_ridge(gamma, y);
      const double base =
          lp_norm(as_integrand(gamma), Domain::line_times_unit_cube(0), p, {}, kink_hints(gamma)).value;
      const double big =
          lp_norm(as_integrand(lifted), Domain::line_times_unit_cube(n), p, cfg, kink_hints(lifted)).value;
      const double expected = std::pow(std::abs(y[0]), -1.0 / p) * base;
      const double rel = std::abs(big - expected) / expected;
      return std::pair{rel < 1e-4, "relative deviation " + num(rel)};
    });
  }
}

}  // namespace

std::vector<LemmaCheck> run_lemma_suite(const VerifyOptions& options) {
  for (const auto& g : options.only)
    if (std::find(kGroups.begin(), kGroups.end(), g) == kGroups.end())
      throw ConfigError("unknown check group \"" + g + "\" (expected difference, limits, bump or lifting)");
  const auto wanted = [&](const std::string& g) {
    return options.only.empty() || std::find(options.only.begin(), options.only.end(), g) != options.only.end();
  };
  Suite s;
  for (const auto& g : kGroups) {
    if (!wanted(g)) continue;
    s.group = g;
    if (g == "difference") difference_group(s, options.inject_broken_activation);
    if (g == "limits") limits_group(s, options.inject_broken_activation);
    if (g == "bump") bump_group(s);
    if (g == "lifting") lifting_group(s);
  }
  return s.checks;
}

}  // namespace ridgelab::cli
