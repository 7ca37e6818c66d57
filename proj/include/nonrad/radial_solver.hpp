#pragma once

// Finite-volume evolution of radial waves u_tt = u_rr + (D-1)/r u_r + F(u)
// on a uniform grid r_i = i dr, i = 0..n_r, with cone diagnostics.

#include "nonrad/exact_evolution.hpp"
#include "nonrad/exterior_basis.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nonrad {

/// How a radial profile relates to the field on R^d.
///  mode_coefficient: the lifted coefficient of a unit-normalised harmonic,
///                    measured with r^{D-1} dr.
///  physical:         a radial function on R^d (nu = 0), measured with
///                    |S^{d-1}| r^{d-1} dr.
enum class Normalization { mode_coefficient, physical };

const char* to_string(Normalization n);
Normalization normalization_from_string(const std::string& name);

struct RadialGridField {
  ModeSpec spec;
  std::vector<double> r;
  std::vector<double> u;
  std::vector<double> ut;
  Normalization normalization = Normalization::mode_coefficient;

  double dr() const { return r.size() > 1 ? r[1] - r[0] : 0.0; }
  /// Factor in front of int ... r^{D-1} dr: 1 or |S^{d-1}|.
  double measure_factor() const;
  /// Throws std::invalid_argument unless the grid is uniform from 0 and the
  /// arrays are finite and of equal length.
  void validate() const;
};

/// |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2).
double sphere_area(int d);

std::vector<double> uniform_grid(double r_max, int n_r);

/// Lifted data of an exterior mode, extended inside R by an even polynomial.
RadialGridField field_from_mode(const ExteriorModeData& data, double r_max, int n_r, int blend_order = 1,
                                Normalization normalization = Normalization::mode_coefficient);

RadialGridField field_from_functions(const ModeSpec& spec, double r_max, int n_r,
                                     const std::function<double(double)>& u0,
                                     const std::function<double(double)>& u1,
                                     Normalization normalization = Normalization::mode_coefficient);

/// measure * int (u_t^2 + u_r^2) r^{D-1} dr over the whole grid.
double field_energy(const RadialGridField& f);

enum class Scheme { leapfrog, rk4_mol };
enum class OuterBoundary { dirichlet, neumann, sommerfeld, exact };

const char* to_string(Scheme s);
const char* to_string(OuterBoundary b);
Scheme scheme_from_string(const std::string& name);
OuterBoundary boundary_from_string(const std::string& name);

/// F(u) for the three-dimensional radial equation, acting on the physical
/// field. Custom forces must satisfy |F(u)| <= C |u|^5 and may carry their
/// potential G (G' = -F) for the energy.
struct Nonlinearity {
  enum class Kind { none, defocusing_quintic, focusing_quintic, custom };
  Kind kind = Kind::none;
  std::function<double(double)> force;
  std::function<double(double)> potential;
  double C = 0.0;

  static Nonlinearity none() { return {}; }
  static Nonlinearity defocusing() { return {Kind::defocusing_quintic, {}, {}, 1.0}; }
  static Nonlinearity focusing() { return {Kind::focusing_quintic, {}, {}, 1.0}; }
  /// Rejects f unless |f(u)| <= C |u|^5 on a sample of u in [-10, 10].
  static Nonlinearity custom(std::function<double(double)> f, double C, std::function<double(double)> G = {});

  bool linear() const { return kind == Kind::none; }
  double F(double u) const;
  double G(double u) const;
  std::string name() const;
};

Nonlinearity nonlinearity_from_string(const std::string& name);

/// Exact exterior solution valid for r > R + |t|.
struct ExteriorDescriptor {
  ExactField field;
  double R = 1.0;
};

/// Exact exterior of mode data, scaled to the given normalization.
ExteriorDescriptor exterior_descriptor(const ExteriorModeData& data, Normalization normalization);

struct SolverConfig {
  double r_max = 40.0;
  int n_r = 4000;
  double cfl = 0.9;
  double t_final = 10.0;
  Scheme scheme = Scheme::leapfrog;
  OuterBoundary boundary = OuterBoundary::dirichlet;
  Nonlinearity nonlinearity;
  int n_snapshots = 201;
  double blowup_threshold = 1e6;
  std::optional<ExteriorDescriptor> exterior;

  void validate() const;
};

struct Trajectory {
  ModeSpec spec;
  Normalization normalization = Normalization::mode_coefficient;
  std::vector<double> r;
  std::vector<double> times;
  std::vector<std::vector<double>> u;
  std::vector<std::vector<double>> ut;
  /// Conserved functional (linear part plus potential) at each snapshot.
  std::vector<double> energy;
  /// Largest radius not yet reached by boundary effects at each snapshot.
  std::vector<double> r_clean;
  double dt = 0.0;
  long steps = 0;
  bool blown_up = false;
  std::string diagnostic;
  Nonlinearity nonlinearity;
  std::optional<ExteriorDescriptor> exterior;

  double dr() const { return r[1] - r[0]; }
  double measure_factor() const;
  RadialGridField snapshot(std::size_t k) const;
  std::size_t nearest_snapshot(double t) const;
};

/// Linear evolution in the lifted dimension of the data's mode.
Trajectory solve_mode_linear(const RadialGridField& initial, const SolverConfig& config);

/// Three-dimensional radial equation with the configured nonlinearity.
Trajectory solve_quintic(const RadialGridField& initial, const SolverConfig& config);

/// Dispatches on config.nonlinearity.
Trajectory solve(const RadialGridField& initial, const SolverConfig& config);

/// Evolves to -t_final by time reversal; times are returned as negative
/// values in increasing order.
Trajectory solve_backward(const RadialGridField& initial, const SolverConfig& config);

/// Joins a backward and a forward run sharing t = 0.
Trajectory merge_two_sided(const Trajectory& backward, const Trajectory& forward);

struct ConeEnergySample {
  double t = 0.0;
  double energy = 0.0;
  bool truncated = false;
};

/// measure * int_{R+|t|} (u_t^2 + u_r^2) r^{D-1} dr at every snapshot. An
/// exact exterior descriptor supplies the tail beyond the clean region;
/// otherwise the sample is flagged when the field there is not negligible.
std::vector<ConeEnergySample> cone_energy(const Trajectory& traj, double R);

struct ConeLimit {
  double t_half = 0.0;
  double t_end = 0.0;
  double e_half = 0.0;
  double e_end = 0.0;
  /// Extrapolated limit and |difference of successive extrapolants|.
  double limit = 0.0;
  double cauchy = 0.0;
  bool truncated = false;
};

/// Limit of the exterior energy as t -> +inf (sign = +1) or -inf (sign = -1).
/// For d = 3 radial data with support radius rho the energy outside R + |t|
/// approaches its limit like 1/(R+|t|); the estimate is the Richardson
/// extrapolation in 1/(R+|t|) from the samples at T/2 and T.
ConeLimit cone_energy_limit(const Trajectory& traj, double R, int sign);

struct YNormEstimate {
  double value = 0.0;
  double half_window = 0.0;
  double relative_change = 0.0;
  bool truncated = false;
};

/// (int_t (int_{|x|>r+|t|} |u|^10 dx)^{1/2} dt)^{1/5} over the stored window.
YNormEstimate ynorm_estimate(const Trajectory& traj, double r);

struct TailMax {
  double value = 0.0;
  double t_at_max = 0.0;
  bool truncated = false;
};

/// max over stored times of int_{|x|>r+|t|} |u|^6 dx.
TailMax l6_tail(const Trajectory& traj, double r);

struct DuhamelReport {
  double max_difference = 0.0;
  double max_nonlinear = 0.0;
  double relative = 0.0;
  std::size_t points = 0;
};

/// Compares u - S_L(data) at the final time with the explicit radial
/// Duhamel integral of the stored source, for D = 3 runs.
DuhamelReport duhamel_check(const Trajectory& nonlinear, const Trajectory& linear, double r_probe_max);

}  // namespace nonrad
