#include "nonrad/polylib.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace nonrad {

RealPoly to_real(const RationalPoly& p) {
  std::vector<double> cs;
  cs.reserve(p.coeffs().size());
  for (const auto& c : p.coeffs()) cs.push_back(c.get_d());
  return RealPoly(std::move(cs));
}

RationalPoly to_rational(const RealPoly& p) {
  std::vector<Rational> cs;
  cs.reserve(p.coeffs().size());
  for (double c : p.coeffs()) {
    if (!std::isfinite(c)) throw std::invalid_argument("to_rational: non-finite coefficient");
    cs.emplace_back(c);
  }
  return RationalPoly(std::move(cs));
}

std::pair<RationalPoly, RationalPoly> divmod(const RationalPoly& num, const RationalPoly& den) {
  if (den.is_zero()) throw std::invalid_argument("divmod: division by the zero polynomial");
  std::vector<Rational> rem = num.coeffs();
  const int dd = den.degree();
  if (num.is_zero() || num.degree() < dd) return {RationalPoly(), num};
  std::vector<Rational> quot(static_cast<std::size_t>(num.degree() - dd) + 1, Rational(0));
  const Rational lead = den.leading();
  for (int i = num.degree(); i >= dd; --i) {
    const Rational q = rem[static_cast<std::size_t>(i)] / lead;
    quot[static_cast<std::size_t>(i - dd)] = q;
    if (q == 0) continue;
    for (int j = 0; j <= dd; ++j) rem[static_cast<std::size_t>(i - dd + j)] -= q * den[static_cast<std::size_t>(j)];
  }
  rem.resize(static_cast<std::size_t>(dd));
  return {RationalPoly(std::move(quot)), RationalPoly(std::move(rem))};
}

namespace {

RationalPoly monic(const RationalPoly& p) {
  if (p.is_zero()) return p;
  return p * Rational(1 / p.leading());
}

// Positive rescaling keeps the sign pattern a Sturm chain relies on.
RationalPoly scale_positive(const RationalPoly& p) {
  if (p.is_zero()) return p;
  return p * Rational(1 / abs(p.leading()));
}

RationalPoly poly_gcd(RationalPoly a, RationalPoly b) {
  while (!b.is_zero()) {
    RationalPoly r = divmod(a, b).second;
    a = std::move(b);
    b = monic(r);
  }
  return monic(a);
}

Rational factorial(int n) {
  mpz_class f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return Rational(f);
}

Rational pow2(int n) {
  mpz_class p = 1;
  p <<= n;
  return Rational(p);
}

RationalPoly binomial_power(const Rational& shift, int n) {
  // (x + shift)^n
  RationalPoly out = RationalPoly::constant(Rational(1));
  const RationalPoly lin{shift, Rational(1)};
  for (int i = 0; i < n; ++i) out = out * lin;
  return out;
}

RationalPoly nth_derivative(RationalPoly p, int n) {
  for (int i = 0; i < n; ++i) p = p.derivative();
  return p;
}

int sign(const Rational& q) { return sgn(q); }

struct SturmChain {
  std::vector<RationalPoly> seq;

  explicit SturmChain(const RationalPoly& p) {
    seq.push_back(p);
    seq.push_back(p.derivative());
    while (!seq.back().is_zero() && seq.back().degree() > 0) {
      RationalPoly r = divmod(seq[seq.size() - 2], seq.back()).second;
      if (r.is_zero()) break;
      seq.push_back(scale_positive(-r));
    }
  }

  int variations(const Rational& x) const {
    int count = 0, last = 0;
    for (const auto& s : seq) {
      const int sg = sign(s(x));
      if (sg == 0) continue;
      if (last != 0 && sg != last) ++count;
      last = sg;
    }
    return count;
  }
};

void isolate(const SturmChain& chain, const RationalPoly& h, Rational a, Rational b, int va, int vb,
             std::vector<Rational>& roots) {
  const int n = va - vb;
  if (n <= 0) return;
  if (n == 1) {
    // One simple root in (a, b].
    if (sign(h(b)) == 0) {
      roots.push_back(b);
      return;
    }
    int sa = sign(h(a));
    for (int it = 0; it < 64; ++it) {
      Rational m = (a + b) / 2;
      const int sm = sign(h(m));
      if (sm == 0) {
        roots.push_back(m);
        return;
      }
      if (sm == sa) {
        a = m;
      } else {
        b = m;
      }
    }
    roots.push_back((a + b) / 2);
    return;
  }
  const Rational m = (a + b) / 2;
  const int vm = chain.variations(m);
  isolate(chain, h, a, m, va, vm, roots);
  isolate(chain, h, m, b, vm, vb, roots);
}

std::vector<Rational> real_roots_in(const RationalPoly& p, const Rational& a, const Rational& b) {
  std::vector<Rational> roots;
  if (p.is_zero() || p.degree() == 0) return roots;
  const RationalPoly g = poly_gcd(p, p.derivative());
  const RationalPoly h = monic(divmod(p, g).first);
  const SturmChain chain(h);
  isolate(chain, h, a, b, chain.variations(a), chain.variations(b), roots);
  return roots;
}

}  // namespace

int count_real_roots(const RationalPoly& p, const Rational& a, const Rational& b) {
  if (p.is_zero()) throw std::invalid_argument("count_real_roots: zero polynomial");
  if (p.degree() == 0) return 0;
  const RationalPoly g = poly_gcd(p, p.derivative());
  const SturmChain chain(monic(divmod(p, g).first));
  return chain.variations(a) - chain.variations(b);
}

Rational max_on_interval(const RationalPoly& f, const RationalPoly& critical, const Rational& a,
                         const Rational& b, bool* exact) {
  if (b < a) throw std::invalid_argument("max_on_interval: empty interval");
  Rational best = std::max(f(a), f(b));
  if (critical.is_zero() || critical.degree() == 0) {
    if (exact) *exact = true;
    return best;
  }
  if (critical.degree() <= kExactRootIsolationDegree) {
    for (const auto& x : real_roots_in(critical, a, b)) best = std::max(best, Rational(f(x)));
    if (exact) *exact = true;
    return best;
  }
  // Dense Chebyshev sampling with one Newton refinement on the critical polynomial.
  const RealPoly fr = to_real(f), cr = to_real(critical), dcr = cr.derivative();
  const double ad = a.get_d(), bd = b.get_d();
  const int samples = 10 * critical.degree() + 1;
  for (int i = 0; i < samples; ++i) {
    const double t = std::cos(std::numbers::pi * (i + 0.5) / samples);
    double x = 0.5 * (ad + bd) + 0.5 * (bd - ad) * t;
    const double d = dcr(x);
    if (d != 0.0) {
      const double xn = x - cr(x) / d;
      if (xn > ad && xn < bd) x = xn;
    }
    best = std::max(best, Rational(f(Rational(x))));
  }
  (void)fr;
  if (exact) *exact = false;
  return best;
}

Rational max_on_interval(const RationalPoly& f, const Rational& a, const Rational& b, bool* exact) {
  return max_on_interval(f, f.derivative(), a, b, exact);
}

// ---------------------------------------------------------------------------

double legendre_eval(int n, double x) {
  if (n < 0) throw std::invalid_argument("legendre_eval: negative degree");
  if (n == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double modified_legendre_eval(int n, double x) {
  if (n < 0) throw std::invalid_argument("modified_legendre_eval: negative degree");
  // Jacobi (alpha, beta) = (0, 1):
  // (k+1)(2k-1) J_k = [(4k^2-1) x - 1] J_{k-1} - (k-1)(2k+1) J_{k-2}
  double j0 = 1.0;
  if (n == 0) return 0.5 * j0;
  double j1 = 0.5 * (3.0 * x - 1.0);
  for (int k = 2; k <= n; ++k) {
    const double kk = k;
    const double j2 = (((4.0 * kk * kk - 1.0) * x - 1.0) * j1 - (kk - 1.0) * (2.0 * kk + 1.0) * j0) /
                      ((kk + 1.0) * (2.0 * kk - 1.0));
    j0 = j1;
    j1 = j2;
  }
  return 0.5 * j1;
}

RationalPoly legendre_rodrigues(int n) {
  if (n < 0) throw std::invalid_argument("legendre_rodrigues: negative degree");
  RationalPoly base = binomial_power(Rational(-1), n) * binomial_power(Rational(1), n);
  return nth_derivative(base, n) * Rational(1 / (pow2(n) * factorial(n)));
}

RationalPoly modified_legendre_rodrigues(int n) {
  if (n < 0) throw std::invalid_argument("modified_legendre_rodrigues: negative degree");
  RationalPoly base = binomial_power(Rational(1), n) * binomial_power(Rational(-1), n + 1);
  return nth_derivative(base, n + 1) * Rational(1 / (pow2(n + 1) * factorial(n + 1)));
}

Rational modified_legendre_leading(int n) {
  return factorial(2 * n + 1) / (pow2(n + 1) * factorial(n) * factorial(n + 1));
}

RationalPoly modified_legendre_ode_residual(int n) {
  const RationalPoly q = modified_legendre_rodrigues(n);
  const RationalPoly xp1{Rational(1), Rational(1)};
  const RationalPoly one_minus_x2{Rational(1), Rational(0), Rational(-1)};
  const RationalPoly flux = xp1 * one_minus_x2 * q.derivative();
  return flux.derivative() + (xp1 * q) * Rational(n * (n + 2));
}

RationalPoly legendre_ode_residual(int n) {
  const RationalPoly p = legendre_rodrigues(n);
  const RationalPoly one_minus_x2{Rational(1), Rational(0), Rational(-1)};
  return (one_minus_x2 * p.derivative()).derivative() + p * Rational(n * (n + 1));
}

QuadratureRule gauss_nodes(int n) {
  if (n < 1 || n > 512) throw std::invalid_argument("gauss_nodes: n must lie in [1, 512], got " + std::to_string(n));
  QuadratureRule rule;
  rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
  rule.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0.0L;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0L;
      dp = n * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    // refresh derivative at the converged node
    long double p0 = 1.0L, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0L;
    dp = n * (x * p1 - p0) / (x * x - 1.0L);
    const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = static_cast<double>(-x);
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = static_cast<double>(x);
    rule.weights[static_cast<std::size_t>(i)] = static_cast<double>(w);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = static_cast<double>(w);
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

double family_norm2(Family family, int n) {
  return family == Family::legendre ? 2.0 / (2.0 * n + 1.0) : 1.0 / (2.0 * (n + 1.0));
}

double family_eval(Family family, int n, double x) {
  return family == Family::legendre ? legendre_eval(n, x) : modified_legendre_eval(n, x);
}

std::vector<double> project(const RealPoly& poly, Family family, Weight weight) {
  const bool consistent = (family == Family::legendre && weight == Weight::dx) ||
                          (family == Family::modified && weight == Weight::x_plus_one_dx);
  if (!consistent)
    throw std::invalid_argument("project: family/weight mismatch (legendre pairs with dx, modified with (x+1)dx)");
  const int deg = poly.degree();
  if (deg > kMaxProjectionDegree)
    throw std::invalid_argument("project: degree " + std::to_string(deg) + " exceeds " +
                                std::to_string(kMaxProjectionDegree));
  // Integrand degree <= 2*deg + 1.
  const QuadratureRule rule = gauss_nodes(deg + 2);
  std::vector<double> a(static_cast<std::size_t>(deg) + 1, 0.0);
  for (int n = 0; n <= deg; ++n) {
    const double inner = rule.integrate([&](double x) {
      const double w = weight == Weight::dx ? 1.0 : x + 1.0;
      return w * poly(x) * family_eval(family, n, x);
    });
    a[static_cast<std::size_t>(n)] = inner / family_norm2(family, n);
  }
  return a;
}

// ---------------------------------------------------------------------------

std::string to_string(LemmaVariant v) {
  switch (v) {
    case LemmaVariant::sup_odd: return "sup_odd";
    case LemmaVariant::deriv_odd: return "deriv_odd";
    case LemmaVariant::sup_even: return "sup_even";
    case LemmaVariant::deriv_even: return "deriv_even";
  }
  return "unknown";
}

LemmaVariant lemma_variant_from_string(const std::string& name) {
  if (name == "sup_odd") return LemmaVariant::sup_odd;
  if (name == "deriv_odd") return LemmaVariant::deriv_odd;
  if (name == "sup_even") return LemmaVariant::sup_even;
  if (name == "deriv_even") return LemmaVariant::deriv_even;
  throw std::invalid_argument("unknown lemma variant '" + name +
                              "' (expected sup_odd, deriv_odd, sup_even or deriv_even)");
}

namespace {

bool is_derivative_variant(LemmaVariant v) {
  return v == LemmaVariant::deriv_odd || v == LemmaVariant::deriv_even;
}

LemmaResult finish(Rational lhs, Rational rhs, bool exact) {
  LemmaResult res;
  res.lhs = std::move(lhs);
  res.rhs = std::move(rhs);
  res.holds = res.lhs <= res.rhs;
  res.exact_max = exact;
  return res;
}

}  // namespace

LemmaResult lemma_check(const RationalPoly& poly, LemmaVariant variant, const Rational& L, const Rational& l) {
  if (L <= 0) throw std::invalid_argument("lemma_check: L must be positive");
  if (is_derivative_variant(variant) && !(l > 0 && L >= 2 * l))
    throw std::invalid_argument("lemma_check: derivative variants need L >= 2l > 0");
  const int kappa = poly.degree();
  const RationalPoly z{Rational(0), Rational(1)};
  const RationalPoly p2 = poly * poly;
  bool exact = true;
  switch (variant) {
    case LemmaVariant::sup_odd: {
      Rational lhs = max_on_interval(p2, poly.derivative(), Rational(0), L, &exact);
      Rational rhs = Rational((kappa + 1) * (kappa + 1)) / L * p2.integrate(Rational(0), L);
      return finish(std::move(lhs), std::move(rhs), exact);
    }
    case LemmaVariant::sup_even: {
      const RationalPoly f = z * p2;
      const RationalPoly crit = poly + (z * poly.derivative()) * Rational(2);
      Rational lhs = max_on_interval(f, crit, Rational(0), L, &exact);
      Rational rhs = Rational(2 * (kappa + 1) * (kappa + 1)) / L * f.integrate(Rational(0), L);
      return finish(std::move(lhs), std::move(rhs), exact);
    }
    case LemmaVariant::deriv_odd: {
      const RationalPoly zp = z * poly.derivative();
      Rational lhs = (zp * zp).integrate(Rational(0), l);
      Rational rhs = Rational(2 * kappa * (kappa + 1)) * l / L * p2.integrate(Rational(0), L);
      return finish(std::move(lhs), std::move(rhs), true);
    }
    case LemmaVariant::deriv_even: {
      const RationalPoly zp = z * poly.derivative();
      Rational lhs = (z * zp * zp).integrate(Rational(0), l);
      Rational rhs = Rational(2 * kappa * (kappa + 2)) * l / L * (z * p2).integrate(Rational(0), L);
      return finish(std::move(lhs), std::move(rhs), true);
    }
  }
  throw std::logic_error("lemma_check: unreachable");
}

LemmaResult lemma_check_unit(const RationalPoly& poly, LemmaVariant variant, const Rational& delta) {
  if (is_derivative_variant(variant) && !(delta > 0 && delta <= 1))
    throw std::invalid_argument("lemma_check_unit: delta must lie in (0, 1]");
  const int kappa = poly.degree();
  const Rational lo(-1), hi(1);
  const RationalPoly xp1{Rational(1), Rational(1)};
  const RationalPoly p2 = poly * poly;
  bool exact = true;
  switch (variant) {
    case LemmaVariant::sup_odd: {
      Rational lhs = max_on_interval(p2, poly.derivative(), lo, hi, &exact);
      Rational rhs = make_rational((kappa + 1) * (kappa + 1), 2) * p2.integrate(lo, hi);
      return finish(std::move(lhs), std::move(rhs), exact);
    }
    case LemmaVariant::sup_even: {
      const RationalPoly f = xp1 * p2;
      const RationalPoly crit = poly + (xp1 * poly.derivative()) * Rational(2);
      Rational lhs = max_on_interval(f, crit, lo, hi, &exact);
      Rational rhs = Rational((kappa + 1) * (kappa + 1)) * f.integrate(lo, hi);
      return finish(std::move(lhs), std::move(rhs), exact);
    }
    case LemmaVariant::deriv_odd: {
      const RationalPoly xp = xp1 * poly.derivative();
      Rational lhs = (xp * xp).integrate(lo, lo + delta);
      Rational rhs = Rational(kappa * (kappa + 1)) * delta * p2.integrate(lo, hi);
      return finish(std::move(lhs), std::move(rhs), true);
    }
    case LemmaVariant::deriv_even: {
      const RationalPoly dp = poly.derivative();
      Rational lhs = (xp1 * xp1 * xp1 * dp * dp).integrate(lo, lo + delta);
      Rational rhs = Rational(kappa * (kappa + 2)) * delta * (xp1 * p2).integrate(lo, hi);
      return finish(std::move(lhs), std::move(rhs), true);
    }
  }
  throw std::logic_error("lemma_check_unit: unreachable");
}

}  // namespace nonrad
