#pragma once

// Polynomial machinery: exact (GMP rational) and floating-point polynomials,
// Legendre and modified Legendre families, Gauss-Legendre quadrature and the
// sup/derivative inequalities for polynomials on an interval.

#include <gmpxx.h>

#include <algorithm>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonrad {

using Rational = mpq_class;

/// num/den in canonical form (gmpxx does not canonicalize this constructor).
inline Rational make_rational(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Dense polynomial with ascending coefficients. Trailing zeros are trimmed,
/// so the zero polynomial has an empty coefficient vector.
template <typename Scalar>
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<Scalar> coeffs) : coeffs_(std::move(coeffs)) { trim(); }
  Poly(std::initializer_list<Scalar> coeffs) : coeffs_(coeffs) { trim(); }

  static Poly monomial(int power, const Scalar& c) {
    std::vector<Scalar> cs(static_cast<std::size_t>(power) + 1, Scalar(0));
    cs.back() = c;
    return Poly(std::move(cs));
  }
  static Poly constant(const Scalar& c) { return Poly(std::vector<Scalar>{c}); }

  bool is_zero() const { return coeffs_.empty(); }
  /// Degree; the zero polynomial reports 0.
  int degree() const { return coeffs_.empty() ? 0 : static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Scalar>& coeffs() const { return coeffs_; }
  Scalar operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : Scalar(0); }
  Scalar leading() const { return coeffs_.empty() ? Scalar(0) : coeffs_.back(); }

  Scalar operator()(const Scalar& x) const {
    Scalar acc(0);
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = Scalar(acc * x + *it);
    return acc;
  }

  Poly derivative() const {
    if (coeffs_.size() <= 1) return Poly();
    std::vector<Scalar> out(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) out[i - 1] = Scalar(coeffs_[i] * Scalar(static_cast<long>(i)));
    return Poly(std::move(out));
  }

  /// Antiderivative vanishing at 0.
  Poly antiderivative() const {
    std::vector<Scalar> out(coeffs_.size() + 1, Scalar(0));
    for (std::size_t i = 0; i < coeffs_.size(); ++i) out[i + 1] = Scalar(coeffs_[i] / Scalar(static_cast<long>(i + 1)));
    return Poly(std::move(out));
  }

  Scalar integrate(const Scalar& a, const Scalar& b) const {
    const Poly anti = antiderivative();
    return Scalar(anti(b) - anti(a));
  }

  /// Returns x -> P(scale * x + shift).
  Poly compose_affine(const Scalar& scale, const Scalar& shift) const {
    Poly result;
    const Poly lin{shift, scale};
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) result = result * lin + constant(*it);
    return result;
  }

  Poly& operator+=(const Poly& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Scalar(0));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    trim();
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Scalar(0));
    for (std::size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    trim();
    return *this;
  }
  Poly& operator*=(const Scalar& s) {
    for (auto& c : coeffs_) c *= s;
    trim();
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Scalar& s) { return a *= s; }
  friend Poly operator*(const Scalar& s, Poly a) { return a *= s; }
  friend Poly operator-(Poly a) {
    for (auto& c : a.coeffs_) c = Scalar(-c);
    return a;
  }
  friend Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    std::vector<Scalar> out(a.coeffs_.size() + b.coeffs_.size() - 1, Scalar(0));
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Poly(std::move(out));
  }
  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == Scalar(0)) coeffs_.pop_back();
  }

  std::vector<Scalar> coeffs_;
};

using RationalPoly = Poly<Rational>;
using RealPoly = Poly<double>;

// Explicit conversions between the two representations. Doubles are binary
// fractions, so to_rational is exact.
RealPoly to_real(const RationalPoly& p);
RationalPoly to_rational(const RealPoly& p);

/// Rational remainder of polynomial division; divisor must be nonzero.
std::pair<RationalPoly, RationalPoly> divmod(const RationalPoly& num, const RationalPoly& den);

// ---------------------------------------------------------------------------
// Orthogonal families

/// P_n(x) by the three-term recurrence.
double legendre_eval(int n, double x);

/// Q_n(x), orthogonal on [-1,1] against (x+1)dx with squared norm 1/(2(n+1)).
/// Q_n is half the Jacobi polynomial P_n^{(0,1)}; evaluated by its recurrence.
double modified_legendre_eval(int n, double x);

/// Rodrigues form (1/(2^n n!)) d^n/dx^n (x^2-1)^n, exact.
RationalPoly legendre_rodrigues(int n);

/// Rodrigues form (1/(2^{n+1}(n+1)!)) d^{n+1}/dx^{n+1} [(x+1)^n (x-1)^{n+1}], exact.
RationalPoly modified_legendre_rodrigues(int n);

/// Exact leading coefficient (2n+1)! / (2^{n+1} n! (n+1)!) of Q_n.
Rational modified_legendre_leading(int n);

/// Residual d/dx[(x+1)(1-x^2) Q_n'] + n(n+2)(x+1) Q_n, which is identically zero.
RationalPoly modified_legendre_ode_residual(int n);

/// Residual d/dx[(1-x^2) P_n'] + n(n+1) P_n.
RationalPoly legendre_ode_residual(int n);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
  /// Integral over [a,b] after the affine map from [-1,1].
  template <typename F>
  double integrate(F&& f, double a, double b) const {
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(m + h * nodes[i]);
    return h * s;
  }
};

/// Gauss-Legendre rule with n nodes, 1 <= n <= 512.
QuadratureRule gauss_nodes(int n);

enum class Family { legendre, modified };
enum class Weight { dx, x_plus_one_dx };

/// Squared norm of the n-th family member in its own weighted L2 space.
double family_norm2(Family family, int n);
double family_eval(Family family, int n, double x);

inline constexpr int kMaxProjectionDegree = 64;

/// Expansion coefficients of poly in the given family. The pair must be
/// (legendre, dx) or (modified, x_plus_one_dx).
std::vector<double> project(const RealPoly& poly, Family family, Weight weight);

// ---------------------------------------------------------------------------
// Polynomial inequalities

enum class LemmaVariant { sup_odd, deriv_odd, sup_even, deriv_even };

std::string to_string(LemmaVariant v);
LemmaVariant lemma_variant_from_string(const std::string& name);

struct LemmaResult {
  Rational lhs;
  Rational rhs;
  bool holds = false;
  /// False when the maximum came from sampling (degree above the exact limit).
  bool exact_max = true;

  double lhs_value() const { return lhs.get_d(); }
  double rhs_value() const { return rhs.get_d(); }
};

inline constexpr int kExactRootIsolationDegree = 15;

/// Both sides of the selected inequality on [0, L], e.g. for sup_odd
///   max_{[0,L]} |P|^2  <=  ((k+1)^2 / L) * int_0^L |P|^2,
/// and for deriv_even
///   int_0^l z |z P'|^2  <=  (2 k (k+2) l / L) * int_0^L z |P|^2,
/// with k = deg P. Derivative variants need L >= 2l > 0.
LemmaResult lemma_check(const RationalPoly& poly, LemmaVariant variant, const Rational& L,
                        const Rational& l);

/// The same inequalities in the normalised form on [-1,1] with 0 < delta <= 1:
///   sup_odd    max |P|^2 <= ((k+1)^2/2) int |P|^2
///   deriv_odd  int_{-1}^{-1+delta} |(x+1)P'|^2 <= k(k+1) delta int |P|^2
///   sup_even   max (x+1)|P|^2 <= (k+1)^2 int (x+1)|P|^2
///   deriv_even int_{-1}^{-1+delta} (x+1)^3 |P'|^2 <= k(k+2) delta int (x+1)|P|^2
LemmaResult lemma_check_unit(const RationalPoly& poly, LemmaVariant variant, const Rational& delta);

/// Maximum of f over [a,b]: endpoints plus real roots of f' isolated with a
/// Sturm sequence and refined by exact bisection. Falls back to Chebyshev
/// sampling with a Newton step when deg f' exceeds kExactRootIsolationDegree.
Rational max_on_interval(const RationalPoly& f, const Rational& a, const Rational& b,
                         bool* exact = nullptr);

/// Same as max_on_interval, but the caller supplies the polynomial whose roots
/// contain every interior critical point of f.
Rational max_on_interval(const RationalPoly& f, const RationalPoly& critical, const Rational& a,
                         const Rational& b, bool* exact = nullptr);

/// Number of distinct real roots of p in (a, b], via a Sturm sequence.
int count_real_roots(const RationalPoly& p, const Rational& a, const Rational& b);

}  // namespace nonrad
