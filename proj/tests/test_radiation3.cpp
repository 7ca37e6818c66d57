#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nonrad/radiation3.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace nonrad;

namespace {

const ModeSpec radial3{3, 0};
const double four_pi = 4 * std::numbers::pi;

double bump(double r, double c, double w) { return std::exp(-std::pow((r - c) / w, 2)); }

double compact(double x) { return std::abs(x) < 1 ? std::pow(1 - x * x, 8) : 0.0; }

RadiationProfile profile_on(double L, int n, const std::function<double(double)>& g) {
  RadiationProfile G;
  for (int j = -n; j <= n; ++j) {
    const double s = L * j / n;
    G.s.push_back(s);
    G.g.push_back(g(s));
  }
  return G;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("forward transform examples") {
  SUBCASE("zero") {
    const auto G = forward_radiation(field_from_functions(radial3, 10.0, 100, {}, {}, Normalization::physical));
    CHECK(max_abs(G.g) == 0.0);
    CHECK(G.side == RadiationSide::minus);
  }
  SUBCASE("A/r outside R radiates nothing beyond R") {
    const auto data = build_exterior_mode(radial3, 1.0, {1.7}, {});
    const auto init = field_from_mode(data, 20.0, 2000, 1, Normalization::physical);
    const auto exact = forward_radiation(init, &data);
    const auto sampled = forward_radiation(init);
    double inside = 0.0, outside_exact = 0.0, outside_sampled = 0.0;
    for (std::size_t i = 0; i < exact.s.size(); ++i) {
      const double a = std::abs(exact.s[i]);
      if (a < 1.0) inside = std::max(inside, std::abs(exact.g[i]));
      if (a > 1.0) outside_exact = std::max(outside_exact, std::abs(exact.g[i]));
      // the stencil straddles the C^1 seam within two cells of R
      if (a > 1.0 + 2.5 * init.dr()) outside_sampled = std::max(outside_sampled, std::abs(sampled.g[i]));
    }
    CHECK(inside > 0.1);
    CHECK(outside_exact <= 1e-15);
    CHECK(outside_sampled <= 1e-12);
  }
  SUBCASE("velocity bump: isometry") {
    const auto init = field_from_functions(radial3, 20.0, 4000, {}, [](double r) { return bump(r, 2.0, 0.7); },
                                           Normalization::physical);
    const auto rep = isometry(init);
    CHECK(rep.energy > 1.0);
    CHECK(rep.relative <= 1e-6);
    // direct energy integral against 8 pi int psi'^2
    const auto G = forward_radiation(init);
    double direct = 0.0, psi = 0.0;
    const double h = init.dr();
    for (std::size_t i = 0; i < init.r.size(); ++i) direct += h * init.r[i] * init.r[i] * std::pow(init.ut[i], 2);
    for (std::size_t i = 0; i < G.s.size(); ++i) psi += h * G.g[i] * G.g[i];
    CHECK(four_pi * direct == doctest::Approx(8 * std::numbers::pi * psi).epsilon(1e-6));
  }
}

TEST_CASE("isometry on a randomized radial suite") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), centre(0.0, 4.0), width(0.6, 1.5);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const double a0 = amp(rng), c0 = centre(rng), w0 = width(rng), a1 = amp(rng), c1 = centre(rng), w1 = width(rng);
    const auto init = field_from_functions(
        radial3, 25.0, 5000, [&](double r) { return a0 * (bump(r, c0, w0) + bump(r, -c0, w0)); },
        [&](double r) { return a1 * (bump(r, c1, w1) + bump(r, -c1, w1)); }, Normalization::physical);
    worst = std::max(worst, isometry(init).relative);
  }
  MESSAGE("worst relative isometry defect " << worst);
  CHECK(worst <= 1e-6);
  CHECK(kRadiationNormalization == 1.0);
}

TEST_CASE("inverse transform") {
  SUBCASE("zero") {
    const auto f = inverse_radiation(profile_on(5.0, 100, [](double) { return 0.0; }));
    CHECK(max_abs(f.u) == 0.0);
    CHECK(max_abs(f.ut) == 0.0);
  }
  SUBCASE("round trips on band-limited profiles") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> amp(-1.0, 1.0), centre(-4.0, 4.0), width(0.7, 1.5);
    double fwd_inv = 0.0, inv_fwd = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> a(4), c(4), w(4);
      for (int m = 0; m < 4; ++m) {
        a[m] = amp(rng);
        c[m] = centre(rng);
        w[m] = width(rng);
      }
      auto g = [&](double s) {
        double v = 0.0;
        for (int m = 0; m < 4; ++m) v += a[m] * bump(s, c[m], w[m]);
        return v;
      };
      const auto G = profile_on(25.0, 5000, g);
      const auto data = inverse_radiation(G);
      const auto back = forward_radiation(data);
      REQUIRE(back.s.size() == G.s.size());
      fwd_inv = std::max(fwd_inv, max_diff(back.g, G.g));
      const auto again = inverse_radiation(back);
      inv_fwd = std::max(inv_fwd, std::max(max_diff(again.u, data.u), max_diff(again.ut, data.ut)));
    }
    MESSAGE("forward(inverse) " << fwd_inv << " inverse(forward) " << inv_fwd);
    CHECK(fwd_inv <= 1e-8);
    CHECK(inv_fwd <= 1e-8);
  }
  SUBCASE("inverse of finite-energy data returns the data") {
    const auto init = field_from_functions(radial3, 25.0, 5000, [](double r) { return bump(r, 0.0, 1.2); },
                                           [](double r) { return r * r * bump(r, 0.0, 1.0); }, Normalization::physical);
    const auto back = inverse_radiation(forward_radiation(init));
    CHECK(max_diff(back.u, init.u) <= 1e-8);
    CHECK(max_diff(back.ut, init.ut) <= 1e-8);
  }
}

TEST_CASE("split and dyadic decomposition") {
  SUBCASE("support inside R leaves no far part") {
    const auto G = profile_on(8.0, 800, [](double s) { return compact(s / 1.5); });
    for (double r1 : {1.5, 2.0, 7.0}) {
      const auto [G1, G2] = split_radiation(G, r1);
      CHECK(max_abs(G2.g) == 0.0);
      CHECK(G1.g == G.g);
    }
  }
  SUBCASE("indicator of 1 < |s| <= 2 has one dyadic piece") {
    const auto G = profile_on(8.0, 800, [](double s) { return std::abs(s) > 1 && std::abs(s) <= 2 ? 1.0 : 0.0; });
    const auto pieces = dyadic_split(G, 1.0);
    int nonzero = 0;
    for (std::size_t j = 0; j < pieces.size(); ++j)
      if (max_abs(pieces[j].g) > 0) {
        ++nonzero;
        CHECK(j == 1);
      }
    CHECK(nonzero == 1);
  }
  SUBCASE("Parseval partition") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 10; ++trial) {
      auto G = profile_on(40.0, 4000, [](double) { return 0.0; });
      for (auto& v : G.g) v = gauss(rng);
      double total = 0.0;
      for (const auto& p : dyadic_split(G, 0.37)) total += p.norm2();
      CHECK(total == doctest::Approx(G.norm2()).epsilon(1e-13));
      const auto [G1, G2] = split_radiation(G, 3.3);
      CHECK(G1.norm2() + G2.norm2() == doctest::Approx(G.norm2()).epsilon(1e-13));
    }
  }
}

TEST_CASE("tail S") {
  const auto compact_G = profile_on(8.0, 800, [](double s) { return compact(s / 1.5); });
  CHECK(tail_S(compact_G, 1.5) == 0.0);
  const auto ind = profile_on(8.0, 8000, [](double s) { return std::abs(s) > 1 && std::abs(s) <= 2 ? 1.0 : 0.0; });
  // the sampled jump at |s| = 2 costs half a cell per side
  CHECK(tail_S(ind, 1.5) == doctest::Approx(std::sqrt(four_pi * 1.0)).epsilon(2e-3));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  auto G = profile_on(10.0, 1000, [](double) { return 0.0; });
  for (auto& v : G.g) v = gauss(rng);
  double prev = INFINITY;
  for (double r = 0.0; r <= 11.0; r += 0.013) {
    const double S = tail_S(G, r);
    CHECK(S <= prev);
    prev = S;
  }
  CHECK(tail_S(G, 0.0) == doctest::Approx(std::sqrt(G.norm2())).epsilon(1e-12));
}

TEST_CASE("numeric radiation") {
  SUBCASE("zero data") {
    const auto init = field_from_functions(radial3, 40.0, 2000, {}, {}, Normalization::physical);
    SolverConfig cfg;
    cfg.r_max = 40.0;
    cfg.n_r = 2000;
    cfg.t_final = 8.0;
    cfg.n_snapshots = 9;
    const auto G = numeric_radiation(solve_mode_linear(init, cfg), 4.0);
    CHECK(max_abs(G.g) == 0.0);
    CHECK(G.stabilized);
  }
  SUBCASE("bump: G_+ matches the explicit transform, G_+(s) = -G_-(-s)") {
    const auto init = field_from_functions(radial3, 80.0, 8000, [](double r) { return bump(r, 0.0, 1.0); },
                                           [](double r) { return 0.5 * bump(r, 0.0, 0.8); }, Normalization::physical);
    SolverConfig cfg;
    cfg.r_max = 80.0;
    cfg.n_r = 8000;
    cfg.t_final = 20.0;
    cfg.n_snapshots = 21;
    const auto Gminus = forward_radiation(init);
    const double h = init.dr();
    for (int side : {1, -1}) {
      const auto tr = side > 0 ? solve_mode_linear(init, cfg) : solve_backward(init, cfg);
      const auto G = numeric_radiation(tr, side * 10.0);
      CHECK(G.stabilized);
      CHECK(G.side == (side > 0 ? RadiationSide::plus : RadiationSide::minus));
      double diff = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < G.s.size(); ++i) {
        // G_- sampled at -s (plus side) or s (minus side)
        const double s = side > 0 ? -G.s[i] : G.s[i];
        const long j = std::lround(s / h) + static_cast<long>(init.r.size()) - 1;
        const double ref = side > 0 ? -Gminus.g[static_cast<std::size_t>(j)] : Gminus.g[static_cast<std::size_t>(j)];
        diff += std::pow(G.g[i] - ref, 2);
        norm += ref * ref;
      }
      MESSAGE("relative L2 mismatch " << std::sqrt(diff / norm));
      CHECK(std::sqrt(diff / norm) <= 1e-2);
    }
  }
  SUBCASE("static chain data radiate nothing beyond R") {
    const ModeSpec spec{5, 0};
    const auto data = build_exterior_mode(spec, 1.0, {0.8}, {0.0});
    const auto init = field_from_mode(data, 60.0, 6000, 2);
    SolverConfig cfg;
    cfg.r_max = 60.0;
    cfg.n_r = 6000;
    cfg.t_final = 16.0;
    cfg.n_snapshots = 17;
    const auto G = numeric_radiation(solve_mode_linear(init, cfg), 8.0);
    double far = 0.0, near = 0.0;
    const double h = init.dr();
    for (std::size_t i = 0; i < G.s.size(); ++i) {
      if (G.s[i] > 1.0 + 20 * h) far += h * G.g[i] * G.g[i];
      if (std::abs(G.s[i]) < 1.0) near += h * G.g[i] * G.g[i];
    }
    const double energy = field_energy(init);
    MESSAGE("far " << std::sqrt(far) << " near " << std::sqrt(near) << " data " << std::sqrt(energy));
    CHECK(std::sqrt(far) <= 1e-3 * std::sqrt(energy));
    CHECK(std::sqrt(near) > 1e-2 * std::sqrt(energy));
  }
  SUBCASE("moving chain data follow the exact field and decay only like 1/t") {
    // t r^{-3} in D = 5 gives r^2 u_t = 1/(s + t) along s = r - t
    const ModeSpec spec{3, 1};
    const auto data = build_exterior_mode(spec, 1.0, {0.5}, {1.0});
    const auto exact = ExactField::from_mode(data);
    const auto init = field_from_mode(data, 60.0, 6000, 2);
    SolverConfig cfg;
    cfg.r_max = 60.0;
    cfg.n_r = 6000;
    cfg.t_final = 16.0;
    cfg.n_snapshots = 17;
    const auto tr = solve_mode_linear(init, cfg);
    const auto G = numeric_radiation(tr, 8.0);
    const double t = std::abs(tr.times[tr.nearest_snapshot(16.0)]);
    double worst = 0.0;
    for (std::size_t i = 0; i < G.s.size(); ++i) {
      if (G.s[i] < 1.0 + 20 * init.dr()) continue;
      const double r = G.s[i] + t;
      const double ref = r * r * exact.eval(r, t).ut;
      CHECK(ref == doctest::Approx(1.0 / (G.s[i] + t)).epsilon(1e-12));
      worst = std::max(worst, std::abs(G.g[i] - ref) / ref);
    }
    CHECK(worst <= 1e-3);
    CHECK_FALSE(G.stabilized);
  }
  SUBCASE("too short a window is reported") {
    const auto init = field_from_functions(radial3, 20.0, 400, [](double r) { return bump(r, 0.0, 1.0); }, {});
    SolverConfig cfg;
    cfg.r_max = 20.0;
    cfg.n_r = 400;
    cfg.t_final = 1.0;
    cfg.n_snapshots = 3;
    const auto G = numeric_radiation(solve_mode_linear(init, cfg), 0.5);
    CHECK_FALSE(G.stabilized);
  }
}

TEST_CASE("exterior energy channel identity") {
  ChannelConfig cfg;
  SUBCASE("data in P(R): both sides vanish") {
    const auto data = build_exterior_mode(radial3, 1.0, {1.3}, {});
    const auto init = field_from_mode(data, 80.0, 8000, 2, Normalization::physical);
    const auto rep = channel_identity(init, 1.0, cfg, &data);
    MESSAGE("lhs " << rep.lhs << " rhs " << rep.rhs << " energy " << rep.energy);
    CHECK(std::abs(rep.lhs) <= 1e-4 * rep.energy);
    CHECK(std::abs(rep.rhs) <= 1e-12 * rep.energy);
    CHECK_FALSE(rep.truncated);
  }
  SUBCASE("bump data") {
    const auto init = field_from_functions(radial3, 80.0, 8000, [](double r) { return bump(r, 1.0, 1.0); },
                                           [](double r) { return 0.5 * bump(r, 1.2, 0.8); }, Normalization::physical);
    const auto rep = channel_identity(init, 1.0, cfg);
    MESSAGE("lhs " << rep.lhs << " rhs " << rep.rhs << " relative " << rep.relative);
    CHECK(rep.relative <= 1e-2);
    CHECK(rep.stabilized);
    CHECK_FALSE(rep.truncated);
  }
  SUBCASE("radiation supported beyond R carries the whole energy") {
    // equal lobes: int g = 0, so the data are compactly supported
    const auto G = profile_on(80.0, 8000, [](double s) { return compact((s - 4.0) / 1.5) - compact((s + 5.0) / 1.5); });
    const auto init = inverse_radiation(G);
    const auto rep = channel_identity(init, 1.0, cfg);
    MESSAGE("lhs " << rep.lhs << " energy " << rep.energy);
    CHECK(rep.rhs == doctest::Approx(rep.energy).epsilon(1e-6));
    CHECK(rep.lhs == doctest::Approx(rep.energy).epsilon(1e-2));
  }
  SUBCASE("radiation supported inside R: exterior energies die out") {
    const auto G = profile_on(80.0, 8000, [](double s) { return compact((s - 0.2) / 0.7); });
    const auto init = inverse_radiation(G);
    // outside R the inverse is C/r with C = int (g(s) + g(-s)) ds
    double C = 0.0;
    for (std::size_t i = 0; i < G.s.size(); ++i) C += G.weights()[i] * G.g[i];
    const auto ext = build_exterior_mode(radial3, 1.0, {C * std::sqrt(four_pi)}, {});
    CHECK(init.u[200] == doctest::Approx(C / 2.0).epsilon(1e-9));
    const auto rep = channel_identity(init, 1.0, cfg, &ext);
    MESSAGE("lhs " << rep.lhs << " energy " << rep.energy);
    CHECK(std::abs(rep.lhs) <= 1e-4 * rep.energy);
  }
}
