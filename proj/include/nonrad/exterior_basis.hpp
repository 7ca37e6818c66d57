#pragma once

// Exterior data of a single spherical-harmonic mode:
//   u0 = r^{-mu} P(1/r) Phi,   u1 = r^{-mu-1} Q(1/r) Phi,   r > R,
// with the monomial pattern of P and Q fixed by the parity of d.

#include "nonrad/polylib.hpp"

#include <vector>

namespace nonrad {

struct ModeSpec {
  int d = 3;
  int nu = 0;

  bool odd() const { return d % 2 == 1; }
  /// (d-1)/2 for odd d, d/2 for even d.
  int mu() const { return odd() ? (d - 1) / 2 : d / 2; }
  /// Lifted dimension D = d + 2 nu.
  int lifted_dimension() const { return d + 2 * nu; }
  /// Eigenvalue nu (d - 2 + nu) of the angular Laplacian.
  int angular_eigenvalue() const { return nu * (d - 2 + nu); }
  int K1() const { return odd() ? (mu() + nu + 1) / 2 : (mu() + nu) / 2; }
  int K2() const { return odd() ? (mu() + nu) / 2 : (mu() + nu - 1) / 2; }
  /// Power of z carried by A_{k1} in P and by B_{k2} in Q.
  int p_exponent(int k1) const { return odd() ? mu() + 1 + nu - 2 * k1 : mu() + nu - 2 * k1; }
  int q_exponent(int k2) const { return odd() ? mu() + nu - 2 * k2 : mu() + nu - 1 - 2 * k2; }

  /// Throws std::invalid_argument unless d >= 2 and nu >= 0.
  void validate() const;
};

bool operator==(const ModeSpec& a, const ModeSpec& b);

struct ExteriorModeData {
  ModeSpec spec;
  double R = 1.0;
  std::vector<double> A;  // k1 = 1..K1
  std::vector<double> B;  // k2 = 1..K2

  /// P(z) and Q(z) with exact (binary-fraction) coefficients.
  RationalPoly P() const;
  RationalPoly Q() const;
};

ExteriorModeData build_exterior_mode(const ModeSpec& spec, double R, std::vector<double> A, std::vector<double> B);

struct ProfileValues {
  double u0 = 0.0;
  double u1 = 0.0;
  double du0_dr = 0.0;
};

/// Mode coefficients (multiplying the normalised Phi) at r > R.
ProfileValues eval_profiles(const ExteriorModeData& data, double r);

struct SeriesNorms {
  double angular = 0.0;    // int_{|x|>R} |angular gradient of u0|^2
  double u1_norm2 = 0.0;   // int_{|x|>R} |u1|^2
  double du0_norm2 = 0.0;  // int_{|x|>R} |d_r u0|^2
};

/// Exterior norms by exact integration in z = 1/r (weight z dz for even d).
SeriesNorms series_norms(const ExteriorModeData& data);

struct DecayCheck {
  double tail = 0.0;
  double reference = 0.0;
  double ratio = 0.0;
  bool trivial = false;
};

/// tail = int_{|x|>R1} |d_r u0|^2 against (R/R1) times the full gradient
/// energy (nu = 0) or the angular energy (nu >= 1) outside R. Needs R1 >= 2R.
DecayCheck decay_bound_check(const ExteriorModeData& data, double R1);

struct RadialSpan {
  std::vector<int> u0_exponents;
  std::vector<int> u1_exponents;
};

/// Powers r^{2k-d} spanning radial exterior data of non-radiative waves.
RadialSpan radial_span(int d);

/// A power-law sum  sum_i coeff_i r^{power_i}.
struct PowerSum {
  std::vector<double> coeff;
  std::vector<int> power;

  double value(double r) const;
  double derivative(double r) const;
  /// n-th derivative.
  double derivative(double r, int n) const;
  bool empty() const { return coeff.empty(); }
};

/// Lifted profiles r^{-nu} u0 and r^{-nu} u1: sums of A_k r^{2k-D} and B_k r^{2k-D}.
PowerSum lifted_u0(const ExteriorModeData& data);
PowerSum lifted_u1(const ExteriorModeData& data);

/// Samples a power-law exterior profile on a radial grid. Inside R the
/// profile is replaced by the even polynomial sum_{j<=order} a_j r^{2j}
/// matching value and the first `order` derivatives at R.
std::vector<double> extend_to_grid(const PowerSum& exterior, double R, const std::vector<double>& r, int order = 1);

}  // namespace nonrad
