#include "nonrad/exterior_basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nonrad {

void ModeSpec::validate() const {
  if (d < 2) throw std::invalid_argument("ModeSpec: d must be >= 2, got " + std::to_string(d));
  if (nu < 0) throw std::invalid_argument("ModeSpec: nu must be >= 0, got " + std::to_string(nu));
}

bool operator==(const ModeSpec& a, const ModeSpec& b) { return a.d == b.d && a.nu == b.nu; }

RationalPoly ExteriorModeData::P() const {
  RationalPoly p;
  for (std::size_t i = 0; i < A.size(); ++i)
    p += RationalPoly::monomial(spec.p_exponent(static_cast<int>(i) + 1), Rational(A[i]));
  return p;
}

RationalPoly ExteriorModeData::Q() const {
  RationalPoly q;
  for (std::size_t i = 0; i < B.size(); ++i)
    q += RationalPoly::monomial(spec.q_exponent(static_cast<int>(i) + 1), Rational(B[i]));
  return q;
}

ExteriorModeData build_exterior_mode(const ModeSpec& spec, double R, std::vector<double> A, std::vector<double> B) {
  spec.validate();
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("build_exterior_mode: R must be positive and finite");
  if (static_cast<int>(A.size()) != spec.K1())
    throw std::invalid_argument("build_exterior_mode: A has " + std::to_string(A.size()) + " entries, mode (d=" +
                                std::to_string(spec.d) + ", nu=" + std::to_string(spec.nu) + ") needs K1=" +
                                std::to_string(spec.K1()));
  if (static_cast<int>(B.size()) != spec.K2())
    throw std::invalid_argument("build_exterior_mode: B has " + std::to_string(B.size()) + " entries, mode (d=" +
                                std::to_string(spec.d) + ", nu=" + std::to_string(spec.nu) + ") needs K2=" +
                                std::to_string(spec.K2()));
  for (double a : A)
    if (!std::isfinite(a)) throw std::invalid_argument("build_exterior_mode: non-finite A coefficient");
  for (double b : B)
    if (!std::isfinite(b)) throw std::invalid_argument("build_exterior_mode: non-finite B coefficient");
  for (int k = 1; k <= spec.K1(); ++k)
    if (spec.p_exponent(k) < 0) throw std::logic_error("build_exterior_mode: negative P exponent");
  for (int k = 1; k <= spec.K2(); ++k)
    if (spec.q_exponent(k) < 0) throw std::logic_error("build_exterior_mode: negative Q exponent");
  return ExteriorModeData{spec, R, std::move(A), std::move(B)};
}

ProfileValues eval_profiles(const ExteriorModeData& data, double r) {
  if (!(r > data.R)) throw std::invalid_argument("eval_profiles: need r > R");
  const RealPoly p = to_real(data.P()), q = to_real(data.Q());
  const double z = 1.0 / r, mu = data.spec.mu();
  const double rm = std::pow(r, -mu);
  ProfileValues v;
  v.u0 = rm * p(z);
  v.u1 = rm * z * q(z);
  v.du0_dr = rm * z * (-mu * p(z) - z * p.derivative()(z));
  return v;
}

namespace {

// mu P + z P'
RationalPoly radial_derivative_poly(const ExteriorModeData& data) {
  const RationalPoly p = data.P();
  const RationalPoly z{Rational(0), Rational(1)};
  return p * Rational(data.spec.mu()) + z * p.derivative();
}

Rational weighted_integral(const ModeSpec& spec, const RationalPoly& f, const Rational& upper) {
  if (spec.odd()) return f.integrate(Rational(0), upper);
  const RationalPoly z{Rational(0), Rational(1)};
  return (z * f).integrate(Rational(0), upper);
}

}  // namespace

SeriesNorms series_norms(const ExteriorModeData& data) {
  const Rational upper = 1 / Rational(data.R);
  const RationalPoly p = data.P(), q = data.Q(), dp = radial_derivative_poly(data);
  SeriesNorms n;
  n.angular = Rational(Rational(data.spec.angular_eigenvalue()) * weighted_integral(data.spec, p * p, upper)).get_d();
  n.u1_norm2 = weighted_integral(data.spec, q * q, upper).get_d();
  n.du0_norm2 = weighted_integral(data.spec, dp * dp, upper).get_d();
  return n;
}

DecayCheck decay_bound_check(const ExteriorModeData& data, double R1) {
  if (!(R1 >= 2.0 * data.R)) throw std::invalid_argument("decay_bound_check: need R1 >= 2R");
  const RationalPoly p = data.P(), dp = radial_derivative_poly(data);
  const Rational tail = weighted_integral(data.spec, dp * dp, 1 / Rational(R1));
  const Rational upper = 1 / Rational(data.R);
  Rational energy = Rational(data.spec.angular_eigenvalue()) * weighted_integral(data.spec, p * p, upper);
  if (data.spec.nu == 0) energy += weighted_integral(data.spec, dp * dp, upper);
  const Rational reference = Rational(data.R) / Rational(R1) * energy;
  DecayCheck out;
  out.tail = tail.get_d();
  out.reference = reference.get_d();
  if (reference == 0) {
    if (tail != 0) throw std::logic_error("decay_bound_check: nonzero tail with zero reference");
    out.trivial = true;
    out.ratio = 0.0;
  } else {
    out.ratio = Rational(tail / reference).get_d();
  }
  return out;
}

RadialSpan radial_span(int d) {
  if (d < 2) throw std::invalid_argument("radial_span: d must be >= 2");
  RadialSpan s;
  for (int k = 1; k <= (d + 1) / 4; ++k) s.u0_exponents.push_back(2 * k - d);
  for (int k = 1; k <= (d - 1) / 4; ++k) s.u1_exponents.push_back(2 * k - d);
  return s;
}

double PowerSum::value(double r) const { return derivative(r, 0); }

double PowerSum::derivative(double r) const { return derivative(r, 1); }

double PowerSum::derivative(double r, int n) const {
  double s = 0.0;
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    double f = coeff[i];
    for (int j = 0; j < n; ++j) f *= power[i] - j;
    s += f * std::pow(r, power[i] - n);
  }
  return s;
}

PowerSum lifted_u0(const ExteriorModeData& data) {
  PowerSum s;
  const int D = data.spec.lifted_dimension();
  for (std::size_t i = 0; i < data.A.size(); ++i) {
    s.coeff.push_back(data.A[i]);
    s.power.push_back(2 * (static_cast<int>(i) + 1) - D);
  }
  return s;
}

PowerSum lifted_u1(const ExteriorModeData& data) {
  PowerSum s;
  const int D = data.spec.lifted_dimension();
  for (std::size_t i = 0; i < data.B.size(); ++i) {
    s.coeff.push_back(data.B[i]);
    s.power.push_back(2 * (static_cast<int>(i) + 1) - D);
  }
  return s;
}

std::vector<double> extend_to_grid(const PowerSum& exterior, double R, const std::vector<double>& r, int order) {
  if (order < 0 || order > 8) throw std::invalid_argument("extend_to_grid: blend order must lie in [0, 8]");
  if (!(R > 0.0)) throw std::invalid_argument("extend_to_grid: R must be positive");
  const int m = order + 1;
  // Unknowns a_j for (r/R)^{2j}; row n matches the n-th derivative at R.
  std::vector<std::vector<double>> M(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m) + 1));
  for (int n = 0; n < m; ++n) {
    for (int j = 0; j < m; ++j) {
      double f = 1.0;
      for (int i = 0; i < n; ++i) f *= 2 * j - i;
      M[n][j] = f;
    }
    M[n][m] = exterior.derivative(R, n) * std::pow(R, n);
  }
  for (int c = 0; c < m; ++c) {
    int piv = c;
    for (int i = c + 1; i < m; ++i)
      if (std::abs(M[i][c]) > std::abs(M[piv][c])) piv = i;
    std::swap(M[c], M[piv]);
    for (int i = 0; i < m; ++i) {
      if (i == c) continue;
      const double f = M[i][c] / M[c][c];
      for (int j = c; j <= m; ++j) M[i][j] -= f * M[c][j];
    }
  }
  std::vector<double> a(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) a[j] = M[j][m] / M[j][j];

  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] > R || exterior.empty()) {
      out[i] = exterior.empty() ? 0.0 : exterior.value(r[i]);
    } else {
      const double s2 = (r[i] / R) * (r[i] / R);
      double acc = 0.0;
      for (int j = m - 1; j >= 0; --j) acc = acc * s2 + a[j];
      out[i] = acc;
    }
  }
  return out;
}

}  // namespace nonrad
