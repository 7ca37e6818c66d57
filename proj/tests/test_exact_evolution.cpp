#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nonrad/exact_evolution.hpp"

#include <cmath>
#include <random>

using namespace nonrad;

TEST_CASE("chain examples") {
  const auto s1 = chain_lift({3, 0}, 1, ChainKind::position);
  CHECK(s1.c == std::vector<Rational>{Rational(1)});
  const auto s7 = chain_lift({7, 0}, 2, ChainKind::position);
  REQUIRE(s7.c.size() == 2);
  CHECK(s7.c[1] == -3);
  const auto v5 = chain_lift({3, 1}, 1, ChainKind::velocity);
  CHECK(v5.D() == 5);
  CHECK(v5.c == std::vector<Rational>{Rational(1)});
  CHECK(v5.expression() == SymbolicExpr{{{1, -3}, Rational(1)}});
  CHECK_THROWS_AS(chain_lift({3, 0}, 1, ChainKind::velocity), std::invalid_argument);
  CHECK_THROWS_AS(chain_lift({3, 0}, 2, ChainKind::position), std::invalid_argument);
  CHECK_THROWS_AS(chain_lift({3, 0}, 0, ChainKind::position), std::invalid_argument);
}

TEST_CASE("symbolic residual vanishes for every admissible chain") {
  int checked = 0;
  for (int d = 2; d <= 13; ++d)
    for (int nu = 0; nu <= 6; ++nu)
      for (ChainKind kind : {ChainKind::position, ChainKind::velocity}) {
        const ModeSpec spec{d, nu};
        for (int k = 1; k <= max_chain_index(spec, kind); ++k) {
          const auto sol = chain_lift(spec, k, kind);
          CHECK(sol.c.front() == 1);
          CHECK(sol.c.size() == static_cast<std::size_t>(k));
          CHECK(is_zero(apply_wave_operator(sol.expression(), sol.D())));
          ++checked;
        }
      }
  CHECK(checked > 100);
}

TEST_CASE("residual detects a wrong coefficient") {
  auto sol = chain_lift({7, 0}, 2, ChainKind::position);
  sol.c[1] = -2;
  CHECK_FALSE(is_zero(apply_wave_operator(sol.expression(), sol.D())));
}

TEST_CASE("pointwise values") {
  const auto s1 = chain_lift({3, 0}, 1, ChainKind::position);
  const auto p = eval_exact(s1, 2.0, 17.0);
  CHECK(p.u == 0.5);
  CHECK(p.ut == 0.0);
  CHECK(p.ur == -0.25);
  CHECK(eval_exact(chain_lift({7, 0}, 2, ChainKind::position), 1.0, 1.0).u == -2.0);
  const auto v = eval_exact(chain_lift({3, 1}, 1, ChainKind::velocity), 2.0, 0.0);
  CHECK(v.u == 0.0);
  CHECK(v.ut == 0.125);
  CHECK_THROWS_AS(eval_exact(s1, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("cone energy closed forms") {
  const auto s1 = chain_lift({3, 0}, 1, ChainKind::position);
  CHECK(exact_cone_energy(s1, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(exact_cone_energy(s1, 1.0, 3.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(exact_cone_energy(s1, 1.0, -3.0) == doctest::Approx(0.25).epsilon(1e-15));

  // t r^{-3} in D = 5: E = 1/rho + 3 t^2 / rho^3
  const auto v5 = chain_lift({3, 1}, 1, ChainKind::velocity);
  double prev = INFINITY;
  for (double t : {0.0, 1.0, 2.0, 4.0, 8.0}) {
    const double rho = 1.0 + t;
    const double e = exact_cone_energy(v5, 1.0, t);
    CHECK(e == doctest::Approx(1 / rho + 3 * t * t / std::pow(rho, 3)).epsilon(1e-14));
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("cone energy decays at the homogeneous rate for every chain") {
  // E(t) is homogeneous in (t, R) of degree 4k - D - 2 (position) or 4k - D
  // (velocity), so E(t) (R+|t|)^{-rate} tends to a constant and E vanishes.
  for (int d = 2; d <= 13; ++d)
    for (int nu = 0; nu <= 6; ++nu)
      for (ChainKind kind : {ChainKind::position, ChainKind::velocity}) {
        const ModeSpec spec{d, nu};
        for (int k = 1; k <= max_chain_index(spec, kind); ++k) {
          const auto sol = chain_lift(spec, k, kind);
          const int rate = 4 * k - sol.D() - (kind == ChainKind::position ? 2 : 0);
          CHECK(rate < 0);
          double prev = INFINITY;
          for (double t : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
            const double e = exact_cone_energy(sol, 1.0, t);
            CHECK(e > 0.0);
            CHECK(e <= prev * (1 + 1e-12));
            prev = e;
          }
          const double t1 = 1e4, t2 = 1e7;
          const double c1 = exact_cone_energy(sol, 1.0, t1) * std::pow(1 + t1, -rate);
          const double c2 = exact_cone_energy(sol, 1.0, t2) * std::pow(1 + t2, -rate);
          CHECK(c1 == doctest::Approx(c2).epsilon(1e-2));
        }
      }
}

TEST_CASE("mode superposition matches its data at t = 0") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uc(-1.0, 1.0);
  for (int d = 3; d <= 9; ++d) {
    ModeSpec spec{d, d % 3};
    std::vector<double> A(static_cast<std::size_t>(spec.K1())), B(static_cast<std::size_t>(spec.K2()));
    for (auto& a : A) a = uc(rng);
    for (auto& b : B) b = uc(rng);
    const auto data = build_exterior_mode(spec, 1.0, A, B);
    const auto field = ExactField::from_mode(data);
    CHECK(is_zero(apply_wave_operator(field.expression(), field.D())));
    for (double r : {1.5, 2.0, 7.0}) {
      const auto v = field.eval(r, 0.0);
      const auto p = eval_profiles(data, r);
      CHECK(v.u == doctest::Approx(p.u0 * std::pow(r, -spec.nu)).epsilon(1e-12));
      CHECK(v.ut == doctest::Approx(p.u1 * std::pow(r, -spec.nu)).epsilon(1e-12));
    }
  }
}

TEST_CASE("divergent energy is reported") {
  // r^{-1} in D = 5 has infinite exterior energy.
  CHECK_THROWS_AS(exterior_energy(SymbolicExpr{{{0, -1}, Rational(1)}}, 5, 1.0, 0.0), std::domain_error);
}
