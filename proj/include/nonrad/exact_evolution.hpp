#pragma once

// Closed-form evolution of exterior basis data in the lifted dimension D.
// A position chain starting from r^{2k-D} reads
//   f(r,t) = sum_{j<k} c_j t^{2j} r^{2k-D-2j},
// a velocity chain carries one extra power of t. Both solve
//   u_tt - u_rr - (D-1)/r u_r = 0   for r > 0.

#include "nonrad/exterior_basis.hpp"
#include "nonrad/polylib.hpp"

#include <map>
#include <utility>
#include <vector>

namespace nonrad {

enum class ChainKind { position, velocity };

const char* to_string(ChainKind kind);

/// Finite sum of c * t^a * r^b keyed by (a, b).
using SymbolicExpr = std::map<std::pair<int, int>, Rational>;

/// Drops zero coefficients.
void prune(SymbolicExpr& e);
bool is_zero(const SymbolicExpr& e);
SymbolicExpr operator+(const SymbolicExpr& a, const SymbolicExpr& b);
SymbolicExpr scaled(const SymbolicExpr& e, const Rational& s);
SymbolicExpr d_dt(const SymbolicExpr& e);
SymbolicExpr d_dr(const SymbolicExpr& e);
/// (d_t^2 - d_r^2 - (D-1)/r d_r) e, term by term.
SymbolicExpr apply_wave_operator(const SymbolicExpr& e, int D);
double evaluate(const SymbolicExpr& e, double r, double t);

struct ChainSolution {
  ModeSpec spec;
  int k = 1;
  ChainKind kind = ChainKind::position;
  std::vector<Rational> c;

  int D() const { return spec.lifted_dimension(); }
  SymbolicExpr expression() const;
};

/// Largest admissible k for the kind: K1 or K2 of the mode.
int max_chain_index(const ModeSpec& spec, ChainKind kind);

ChainSolution chain_lift(const ModeSpec& spec, int k, ChainKind kind);

struct PointValues {
  double u = 0.0;
  double ut = 0.0;
  double ur = 0.0;
};

PointValues eval_exact(const ChainSolution& sol, double r, double t);

/// int_{R+|t|}^inf (u_t^2 + u_r^2) r^{D-1} dr in closed form.
double exact_cone_energy(const ChainSolution& sol, double R, double t);

/// Exact energy density integral  int_a^inf (u_t^2 + u_r^2) r^{D-1} dr of a
/// symbolic field at time t. Throws std::domain_error when it diverges.
double exterior_energy(const SymbolicExpr& u, int D, double a, double t);

/// Superposition of chains reproducing the lifted data of one exterior mode.
class ExactField {
 public:
  ExactField() = default;
  ExactField(int D, SymbolicExpr u);
  static ExactField from_mode(const ExteriorModeData& data);

  int D() const { return D_; }
  const SymbolicExpr& expression() const { return u_; }
  PointValues eval(double r, double t) const;
  /// Second time derivative.
  double utt(double r, double t) const { return evaluate(utt_, r, t); }
  /// The field s -> u(r, -s).
  ExactField time_reversed() const;
  /// int_a^inf (u_t^2 + u_r^2) r^{D-1} dr at time t.
  double energy_beyond(double a, double t) const { return exterior_energy(u_, D_, a, t); }
  bool empty() const { return u_.empty(); }

 private:
  int D_ = 3;
  SymbolicExpr u_, ut_, ur_, utt_;
};

}  // namespace nonrad
