#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "generators.hpp"
#include "ridgelab/activations.hpp"
#include "ridgelab/difference_integral.hpp"

using namespace ridgelab;

namespace {
const Activationd kUnbounded[] = {Activationd::relu(), Activationd::elu(), Activationd::softplus(),
                                  Activationd::leaky_relu(0.1)};
}

TEST_CASE("closed forms at sample points") {
  CHECK(eval(Activationd::relu(), -1.5) == 0.0);
  CHECK(eval(Activationd::relu(), 2.25) == 2.25);
  CHECK(eval(Activationd::softplus(), 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(eval(Activationd::elu(), -20.0) == doctest::Approx(std::exp(-20.0) - 1.0).epsilon(1e-15));
  CHECK(eval(Activationd::elu(2.0), -1.0) == doctest::Approx(2.0 * (std::exp(-1.0) - 1.0)));
  CHECK(eval(Activationd::logistic(), 0.0) == 0.5);
  CHECK(eval(Activationd::leaky_relu(), -3.0) == doctest::Approx(-0.03));
}

TEST_CASE("softplus stays finite and accurate for large arguments") {
  const auto sp = Activationd::softplus();
  CHECK(sp(800.0) == 800.0);
  CHECK(sp(-800.0) == 0.0);
  CHECK(sp(40.0) == doctest::Approx(40.0 + std::exp(-40.0)).epsilon(1e-15));
  CHECK(sp(-40.0) == doctest::Approx(std::exp(-40.0)).epsilon(1e-12));
  const auto lg = Activationd::logistic();
  CHECK(lg(-800.0) == 0.0);
  CHECK(lg(800.0) == 1.0);
}

TEST_CASE("non-finite input is rejected") {
  CHECK_THROWS_AS(eval(Activationd::relu(), std::numeric_limits<double>::quiet_NaN()), std::invalid_argument);
  CHECK_THROWS_AS(eval(Activationd::logistic(), kInf), std::invalid_argument);
  CHECK_THROWS_AS(difference_eval(DifferenceUnit<double>{Activationd::relu(), 1, 1.0}, -kInf), std::invalid_argument);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(Activationd::elu(0.0), std::invalid_argument);
  CHECK_THROWS_AS(Activationd::leaky_relu(1.0), std::invalid_argument);
  CHECK_THROWS_AS(DifferenceUnit<double>(Activationd::relu(), 0, 1.0), std::invalid_argument);
  CHECK(Activationd::leaky_relu().alpha() == 0.01);
  CHECK(Activationd::elu().alpha() == 1.0);
}

TEST_CASE("names round-trip") {
  for (auto kind : {ActivationKind::Logistic, ActivationKind::ReLU, ActivationKind::ELU, ActivationKind::Softplus,
                    ActivationKind::LeakyReLU})
    CHECK(activation_kind_from_name(activation_name(kind)) == kind);
  CHECK(Activationd::from_name("leakyrelu", 0.2).alpha() == 0.2);
  CHECK_THROWS(activation_kind_from_name("tanh"));
}

TEST_CASE("asymptote table") {
  CHECK(asymptotes(Activationd::relu()) == AsymptoticAffine{1, 0, 0, 0});
  CHECK(asymptotes(Activationd::leaky_relu(0.1)) == AsymptoticAffine{1, 0, 0.1, 0});
  CHECK(asymptotes(Activationd::logistic()) == AsymptoticAffine{0, 1, 0, 0});
  CHECK(asymptotes(Activationd::elu()) == AsymptoticAffine{1, 0, 0, -1});
  CHECK(asymptotes(Activationd::softplus()) == AsymptoticAffine{1, 0, 0, 0});
  CHECK(asymptotes(Activationd::logistic()).bounded());

  const auto bare = Activationd::custom([](double x) { return std::tanh(x); });
  CHECK_THROWS_AS(asymptotes(bare), UnsupportedError);
  const AsymptoticAffine tanh_table{0, 1, 0, -1};
  CHECK(asymptotes(Activationd::custom([](double x) { return std::tanh(x); }, tanh_table)) == tanh_table);
}

TEST_CASE("asymptote table agrees with far-field values") {
  // phi(t) - beta t at |t| = 60, compared with alpha.
  for (const auto& a : {Activationd::relu(), Activationd::elu(0.7), Activationd::softplus(), Activationd::leaky_relu(0.3),
                        Activationd::logistic()}) {
    const auto t = asymptotes(a);
    CHECK(a(60.0) - t.beta_plus * 60.0 == doctest::Approx(t.alpha_plus).epsilon(1e-9));
    CHECK(a(-60.0) + t.beta_minus * 60.0 == doctest::Approx(t.alpha_minus).epsilon(1e-9));
  }
}

TEST_CASE("difference examples") {
  const DifferenceUnit<double> relu1{Activationd::relu(), 1, 1.0};
  CHECK(difference_eval(relu1, 50.0) == 1.0);
  CHECK(difference_eval(relu1, -50.0) == 0.0);
  CHECK(difference_eval(relu1, 0.25) == 1.25 - 0.25);
  for (const auto& a : kUnbounded) CHECK(difference_eval(DifferenceUnit<double>{a, 3, 0.0}, 1.7) == 0.0);
}

TEST_CASE("binomial weights") {
  CHECK(difference_weights(0) == std::vector<double>{1});
  CHECK(difference_weights(1) == std::vector<double>{-1, 1});
  CHECK(difference_weights(2) == std::vector<double>{1, -2, 1});
  CHECK(difference_weights(4) == std::vector<double>{1, -4, 6, -4, 1});
}

TEST_CASE("property: recursion equals binomial expansion") {
  gen::Rng rng(101);
  for (const auto& a : {Activationd::logistic(), Activationd::relu(), Activationd::elu(), Activationd::softplus(),
                        Activationd::leaky_relu()}) {
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 1 + trial % 4;
      const double x = gen::uniform(rng, -6, 6), rho = gen::uniform(rng, -2, 2);
      // Independent oracle: Pascal-triangle coefficients computed here.
      double expanded = 0, c = 1;
      for (int k = 0; k <= n; ++k) {
        expanded += ((n - k) % 2 ? -c : c) * a(x + k * rho);
        c = c * (n - k) / (k + 1);
      }
      const double rec = difference_eval(DifferenceUnit<double>{a, n, rho}, x);
      CHECK(std::abs(rec - expanded) <= 1e-12 * std::max(1.0, std::abs(expanded)));
    }
  }
}

TEST_CASE("property: first differences of unbounded built-ins are sigmoidal") {
  for (const auto& a : kUnbounded) {
    const DifferenceUnit<double> u{a, 1, 1.0};
    const double lo = a.kind() == ActivationKind::LeakyReLU ? a.alpha() : 0.0;
    CHECK(std::abs(difference_eval(u, 50.0) - 1.0) < 1e-6);
    CHECK(std::abs(difference_eval(u, -50.0) - lo) < 1e-6);
    double bound = 0;
    for (double x = -100; x <= 100; x += 0.05) bound = std::max(bound, std::abs(difference_eval(u, x)));
    CHECK(bound <= 1.0 + 1e-12);
  }
}

TEST_CASE("property: eventual monotonicity on sampled tails") {
  // A dense grid stands in for the almost-everywhere statement. On the
  // plateaus x + 1 - x is not exactly 1, so moves below 1e-13 are rounding.
  for (const auto& a : kUnbounded) {
    const DifferenceUnit<double> u{a, 1, 1.0};
    for (auto [lo, hi] : {std::pair{10.0, 100.0}, std::pair{-100.0, -10.0}}) {
      int rises = 0, falls = 0;
      double prev = difference_eval(u, lo);
      for (int k = 1; lo + k * 0.01 <= hi; ++k) {
        const double v = difference_eval(u, lo + k * 0.01);
        rises += v > prev + 1e-13;
        falls += v < prev - 1e-13;
        prev = v;
      }
      CHECK((rises == 0 || falls == 0));
    }
  }
}

TEST_CASE("difference integral equals the step") {
  for (double rho : {0.5, 1.0, 2.0, 2.5}) {
    const auto r = difference_integral({Activationd::logistic(), 1, rho});
    CHECK(r.value == doctest::Approx(rho).epsilon(1e-6));
  }
  CHECK(difference_integral({Activationd::logistic(), 1, 0.0}).value == 0.0);
}

TEST_CASE("difference integral of unbounded activations via reduction") {
  // The reduced unit is sigmoidal with limits 0 and 1, so its step-rho
  // difference integrates to rho.
  for (const auto& a : {Activationd::relu(), Activationd::elu(), Activationd::softplus()}) {
    CHECK(difference_integral({a, 1, 1.5}).value == doctest::Approx(1.5).epsilon(1e-6));
  }
  CHECK_THROWS_AS(difference_integral({Activationd::leaky_relu(), 1, 1.0}), NonConvergenceError);
}

TEST_CASE("float instantiation") {
  const auto a = Activationf::softplus();
  CHECK(a(0.0f) == doctest::Approx(std::log(2.0f)));
  CHECK(difference_eval(DifferenceUnit<float>{Activationf::relu(), 2, 1.0f}, -1.0f) == 1.0f);
}
