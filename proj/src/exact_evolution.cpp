#include "nonrad/exact_evolution.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nonrad {

const char* to_string(ChainKind kind) { return kind == ChainKind::position ? "position" : "velocity"; }

void prune(SymbolicExpr& e) {
  for (auto it = e.begin(); it != e.end();) {
    if (it->second == 0)
      it = e.erase(it);
    else
      ++it;
  }
}

bool is_zero(const SymbolicExpr& e) {
  for (const auto& [key, c] : e)
    if (c != 0) return false;
  return true;
}

SymbolicExpr operator+(const SymbolicExpr& a, const SymbolicExpr& b) {
  SymbolicExpr out = a;
  for (const auto& [key, c] : b) out[key] += c;
  prune(out);
  return out;
}

SymbolicExpr scaled(const SymbolicExpr& e, const Rational& s) {
  SymbolicExpr out;
  for (const auto& [key, c] : e) out[key] = c * s;
  prune(out);
  return out;
}

SymbolicExpr d_dt(const SymbolicExpr& e) {
  SymbolicExpr out;
  for (const auto& [key, c] : e)
    if (key.first != 0) out[{key.first - 1, key.second}] += c * key.first;
  prune(out);
  return out;
}

SymbolicExpr d_dr(const SymbolicExpr& e) {
  SymbolicExpr out;
  for (const auto& [key, c] : e)
    if (key.second != 0) out[{key.first, key.second - 1}] += c * key.second;
  prune(out);
  return out;
}

SymbolicExpr apply_wave_operator(const SymbolicExpr& e, int D) {
  SymbolicExpr out;
  for (const auto& [key, c] : e) {
    const auto [a, b] = key;
    if (a >= 2) out[{a - 2, b}] += c * (a * (a - 1));
    // d_r^2 + (D-1)/r d_r acting on r^b gives b (b + D - 2) r^{b-2}
    out[{a, b - 2}] -= c * (b * (b + D - 2));
  }
  prune(out);
  return out;
}

double evaluate(const SymbolicExpr& e, double r, double t) {
  double s = 0.0;
  for (const auto& [key, c] : e) s += c.get_d() * std::pow(t, key.first) * std::pow(r, key.second);
  return s;
}

int max_chain_index(const ModeSpec& spec, ChainKind kind) {
  return kind == ChainKind::position ? spec.K1() : spec.K2();
}

ChainSolution chain_lift(const ModeSpec& spec, int k, ChainKind kind) {
  spec.validate();
  const int kmax = max_chain_index(spec, kind);
  if (k < 1 || k > kmax)
    throw std::invalid_argument("chain_lift: k=" + std::to_string(k) + " outside the admissible range 1.." +
                                std::to_string(kmax) + " for " + to_string(kind) + " data of mode (d=" +
                                std::to_string(spec.d) + ", nu=" + std::to_string(spec.nu) + ")");
  const int D = spec.lifted_dimension();
  ChainSolution sol{spec, k, kind, {Rational(1)}};
  const int shift = kind == ChainKind::position ? 0 : 1;
  for (int j = 0; j + 1 < k; ++j) {
    const Rational num = sol.c.back() * (2 * k - 2 * j - D) * (2 * k - 2 * j - 2);
    const int den = (2 * j + 2 + shift) * (2 * j + 1 + shift);
    sol.c.push_back(num / den);
  }
  return sol;
}

SymbolicExpr ChainSolution::expression() const {
  SymbolicExpr e;
  const int shift = kind == ChainKind::position ? 0 : 1;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const int jj = static_cast<int>(j);
    e[{2 * jj + shift, 2 * k - D() - 2 * jj}] += c[j];
  }
  prune(e);
  return e;
}

PointValues eval_exact(const ChainSolution& sol, double r, double t) {
  if (!(r > 0.0)) throw std::invalid_argument("eval_exact: r must be positive");
  const SymbolicExpr e = sol.expression();
  return {evaluate(e, r, t), evaluate(d_dt(e), r, t), evaluate(d_dr(e), r, t)};
}

namespace {

Rational ipow(const Rational& x, int n) {
  Rational base = n >= 0 ? x : Rational(1 / x);
  unsigned m = static_cast<unsigned>(n >= 0 ? n : -n);
  Rational out(1);
  while (m) {
    if (m & 1u) out *= base;
    base *= base;
    m >>= 1u;
  }
  return out;
}

SymbolicExpr product(const SymbolicExpr& a, const SymbolicExpr& b) {
  SymbolicExpr out;
  for (const auto& [ka, ca] : a)
    for (const auto& [kb, cb] : b) out[{ka.first + kb.first, ka.second + kb.second}] += ca * cb;
  prune(out);
  return out;
}

}  // namespace

double exterior_energy(const SymbolicExpr& u, int D, double a, double t) {
  if (!(a > 0.0)) throw std::invalid_argument("exterior_energy: lower limit must be positive");
  const SymbolicExpr ut = d_dt(u), ur = d_dr(u);
  const SymbolicExpr density = product(ut, ut) + product(ur, ur);
  const Rational aq(a), tq(t);
  Rational total(0);
  for (const auto& [key, c] : density) {
    const int b = key.second + D - 1;
    if (b >= -1)
      throw std::domain_error("exterior_energy: density term r^" + std::to_string(b) +
                              " is not integrable at infinity (inadmissible exponent)");
    total -= c * ipow(tq, key.first) * ipow(aq, b + 1) / (b + 1);
  }
  return total.get_d();
}

double exact_cone_energy(const ChainSolution& sol, double R, double t) {
  if (!(R > 0.0)) throw std::invalid_argument("exact_cone_energy: R must be positive");
  return exterior_energy(sol.expression(), sol.D(), R + std::abs(t), t);
}

ExactField::ExactField(int D, SymbolicExpr u) : D_(D), u_(std::move(u)) {
  prune(u_);
  ut_ = d_dt(u_);
  ur_ = d_dr(u_);
  utt_ = d_dt(ut_);
}

ExactField ExactField::time_reversed() const {
  SymbolicExpr v;
  for (const auto& [key, c] : u_) v[key] = key.first % 2 == 0 ? c : Rational(-c);
  return ExactField(D_, std::move(v));
}

ExactField ExactField::from_mode(const ExteriorModeData& data) {
  SymbolicExpr u;
  for (std::size_t i = 0; i < data.A.size(); ++i)
    u = u + scaled(chain_lift(data.spec, static_cast<int>(i) + 1, ChainKind::position).expression(), Rational(data.A[i]));
  for (std::size_t i = 0; i < data.B.size(); ++i)
    u = u + scaled(chain_lift(data.spec, static_cast<int>(i) + 1, ChainKind::velocity).expression(), Rational(data.B[i]));
  return ExactField(data.spec.lifted_dimension(), std::move(u));
}

PointValues ExactField::eval(double r, double t) const {
  return {evaluate(u_, r, t), evaluate(ut_, r, t), evaluate(ur_, r, t)};
}

}  // namespace nonrad
