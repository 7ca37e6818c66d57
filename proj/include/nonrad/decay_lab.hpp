#pragma once

// The recursion S(r2) <= 1/2 (r1/r2)^alpha + 1/2 S(r1)^l, its exponent ladder
// gamma_{k+1} = alpha gamma_k l / (alpha + gamma_k l), power-law fits, and the
// exterior decay pipeline for radial d = 3 data.

#include "nonrad/exterior_basis.hpp"
#include "nonrad/radial_solver.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nonrad {

struct RecursionParams {
  double alpha = 1.0;
  double l = 5.0;
  double gamma0 = 0.1;

  /// (1 - 1/l) alpha.
  double fixed_point() const { return (1.0 - 1.0 / l) * alpha; }
  /// Throws std::invalid_argument unless alpha > 0, l > 1 (not degenerate)
  /// and 0 < gamma0 <= fixed_point().
  void validate() const;
};

/// gamma_0 .. gamma_n.
std::vector<double> gamma_sequence(const RecursionParams& params, int n);

struct FitResult {
  double beta = 0.0;
  double residual = 0.0;
};

/// Least squares of log value against log r; value ~ r^{-beta}. The residual
/// is the RMS misfit in log space.
FitResult fit_exponent(const std::vector<std::pair<double, double>>& samples);

struct DecayReport {
  std::vector<std::pair<double, double>> samples;
  /// False when some value is not positive (e.g. S identically 0).
  bool fitted = false;
  double beta = 0.0;
  double residual = 0.0;
};

DecayReport make_report(std::vector<std::pair<double, double>> samples);

struct WorstCaseOptions {
  /// S on the initial band r < r1_factor * r2_factor * R.
  double seed = 0.49;
  /// Admissible pairs: r1 >= r1_factor R and r2 >= r2_factor r1.
  double r1_factor = 4.0;
  double r2_factor = 4.0;
  /// The fit uses r in [r_max / fit_span, r_max].
  double fit_span = 10.0;
};

struct WorstCaseReport {
  DecayReport report;
  /// Grid coarser than ratio 1.1: the optimal r1 is resolved only to within
  /// half a grid step in log r.
  bool coarse = false;
  std::vector<double> r;
  std::vector<double> S;
};

/// Largest S on the grid R q^i <= r_max compatible with every admissible
/// inequality: S(r2) = min over admissible r1 of the right-hand side.
WorstCaseReport worst_case_S(const RecursionParams& params, double R, double r_max, double grid_ratio,
                             const WorstCaseOptions& options = {});

struct PipelineConfig {
  double R = 1.0;
  /// Probe radii R * probe_start * probe_ratio^k, k < probe_count.
  double probe_start = 2.0;
  double probe_ratio = 2.0;
  int probe_count = 5;
  Nonlinearity nonlinearity = Nonlinearity::defocusing();
  /// The nonlinear run uses the data's grid.
  double t_final = 8.0;
  int n_snapshots = 81;
  double cfl = 0.9;
};

struct PipelineReport {
  std::vector<double> radii;
  /// (a) S(r) of the data's radiation field.
  DecayReport S_report;
  bool S_nonincreasing = true;
  /// (b) int_{|x|>r} |d_r u0|^2 dx.
  DecayReport dr_u0_report;
  /// (c) max_t int_{|x|>r+|t|} |u|^6 dx along the nonlinear run.
  DecayReport l6_report;
  bool l6_truncated = false;
  bool blown_up = false;
  std::string diagnostic;
  /// No exact exterior was supplied, so P(R) membership is not by construction.
  bool exploratory = false;
};

/// Runs parts (a), (b), (c) on d = 3 radial data; `exterior` marks data whose
/// exterior is an exact basis combination.
PipelineReport nonlinear_decay_pipeline(const RadialGridField& data, const PipelineConfig& config,
                                        const ExteriorModeData* exterior = nullptr);

}  // namespace nonrad
