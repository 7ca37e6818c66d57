#pragma once

// Radiation fields of radial waves. For d = 3 radial data, w = r u solves the
// 1D wave equation, w(r,t) = psi(t+r) - psi(t-r), and the backward radiation
// field is G_-(s) = psi'(s):
//   psi'(r)  = ((r u0)' + r u1) / 2,   psi'(-r) = ((r u0)' - r u1) / 2.

#include "nonrad/exterior_basis.hpp"
#include "nonrad/radial_solver.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace nonrad {

/// Factor between psi' and G_-, fixed by the isometry
/// ||(u0,u1)||^2 = 2 ||G_-||^2 and frozen here.
inline constexpr double kRadiationNormalization = 1.0;

enum class RadiationSide { plus, minus };

const char* to_string(RadiationSide side);

struct RadiationProfile {
  ModeSpec mode{3, 0};
  RadiationSide side = RadiationSide::minus;
  Normalization normalization = Normalization::physical;
  std::vector<double> s;
  std::vector<double> g;
  /// Relative L^2 change between the two extraction times (numeric only).
  double stabilization = 0.0;
  bool stabilized = true;

  /// 4 pi for physical radial profiles, 1 for a unit-normalised harmonic.
  double angular_factor() const;
  /// Trapezoid weights of the s grid.
  std::vector<double> weights() const;
  /// angular_factor * int |g|^2 ds.
  double norm2() const;
  /// Throws std::invalid_argument unless s increases and values are finite.
  void validate() const;
};

/// G_- of d = 3 radial data. Derivatives use fourth-order stencils; where an
/// exact exterior is given, r >= R uses the closed form instead (the interior
/// blend matches it there).
RadiationProfile forward_radiation(const RadialGridField& data, const ExteriorModeData* exterior = nullptr);

/// Radial data with the given G_-; needs a uniform s grid symmetric about a
/// node at 0. The returned grid is the nonnegative half.
RadialGridField inverse_radiation(const RadiationProfile& G);

/// G1 = G on |s| <= r1, G2 = the rest.
std::pair<RadiationProfile, RadiationProfile> split_radiation(const RadiationProfile& G, double r1);

/// Pieces j = 0, 1, ...: |s| <= R0 for j = 0 and 2^{j-1} R0 < |s| <= 2^j R0
/// after that, up to the last nonempty shell.
std::vector<RadiationProfile> dyadic_split(const RadiationProfile& G, double R0);

/// S(r) = (angular_factor * int_{|s|>r} |g|^2 ds)^{1/2}, linear interpolation
/// of |g|^2 at the cut.
double tail_S(const RadiationProfile& G, double r);

/// r^{(D-1)/2} u_t sampled along s = r - |t| at |t| = T and 2T; T > 0 gives
/// G_+, T < 0 gives G_-. The profile holds the 2T extraction.
RadiationProfile numeric_radiation(const Trajectory& traj, double T, double tolerance = 1e-2);

struct IsometryReport {
  double energy = 0.0;
  double twice_norm2 = 0.0;
  double relative = 0.0;
};

/// Compares the data energy with 2 ||G_-||^2.
IsometryReport isometry(const RadialGridField& data, const ExteriorModeData* exterior = nullptr);

struct ChannelConfig {
  double t_final = 24.0;
  double cfl = 0.9;
  int n_snapshots = 49;
  /// Relative Cauchy tolerance for the exterior-energy limits.
  double tolerance = 1e-2;
  /// Limits below this fraction of the data energy are judged against it.
  double floor_fraction = 1e-2;
};

struct ChannelReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double limit_plus = 0.0;
  double limit_minus = 0.0;
  double cauchy = 0.0;
  bool stabilized = true;
  bool truncated = false;
  /// Data energy; |lhs - rhs| is measured against max(rhs, 1e-6 energy).
  double energy = 0.0;
  double relative = 0.0;
};

/// lhs = sum over both time directions of lim E_ext(t; R), from two solver
/// runs on the data's grid; rhs = 2 ||G_-||^2 restricted to |s| > R.
ChannelReport channel_identity(const RadialGridField& data, double R, const ChannelConfig& config = {},
                               const ExteriorModeData* exterior = nullptr);

}  // namespace nonrad
