#include "nonrad/decay_lab.hpp"

#include "nonrad/radiation3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nonrad {

void RecursionParams::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("RecursionParams: alpha must be positive");
  if (!(l > 1.0 + 1e-9))
    throw std::invalid_argument("RecursionParams: l must exceed 1 (l -> 1+ collapses the fixed point (1-1/l) alpha to 0)");
  if (!(gamma0 > 0.0) || gamma0 > fixed_point() * (1 + 1e-15))
    throw std::invalid_argument("RecursionParams: gamma0 must lie in (0, (1-1/l) alpha] = (0, " +
                                std::to_string(fixed_point()) + "]");
}

std::vector<double> gamma_sequence(const RecursionParams& params, int n) {
  params.validate();
  if (n < 0) throw std::invalid_argument("gamma_sequence: n must be nonnegative");
  std::vector<double> g{params.gamma0};
  for (int k = 0; k < n; ++k) {
    const double x = g.back();
    g.push_back(params.alpha * x * params.l / (params.alpha + x * params.l));
  }
  return g;
}

FitResult fit_exponent(const std::vector<std::pair<double, double>>& samples) {
  if (samples.size() < 4) throw std::invalid_argument("fit_exponent: need at least 4 samples");
  double mx = 0.0, my = 0.0;
  for (const auto& [r, v] : samples) {
    if (!(r > 0.0)) throw std::invalid_argument("fit_exponent: radii must be positive");
    if (!(v > 0.0)) throw std::invalid_argument("fit_exponent: values must be positive (got " + std::to_string(v) + ")");
    mx += std::log(r);
    my += std::log(v);
  }
  const double n = static_cast<double>(samples.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [r, v] : samples) {
    sxx += std::pow(std::log(r) - mx, 2);
    sxy += (std::log(r) - mx) * (std::log(v) - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_exponent: radii must not all coincide");
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (const auto& [r, v] : samples) ss += std::pow(std::log(v) - (my + slope * (std::log(r) - mx)), 2);
  return {-slope, std::sqrt(ss / n)};
}

DecayReport make_report(std::vector<std::pair<double, double>> samples) {
  DecayReport rep;
  rep.samples = std::move(samples);
  const bool positive =
      std::all_of(rep.samples.begin(), rep.samples.end(), [](const auto& p) { return p.second > 0.0; });
  if (positive && rep.samples.size() >= 4) {
    const auto fit = fit_exponent(rep.samples);
    rep.fitted = true;
    rep.beta = fit.beta;
    rep.residual = fit.residual;
  }
  return rep;
}

WorstCaseReport worst_case_S(const RecursionParams& params, double R, double r_max, double grid_ratio,
                             const WorstCaseOptions& options) {
  params.validate();
  if (!(R > 0.0) || !(r_max > R)) throw std::invalid_argument("worst_case_S: need 0 < R < r_max");
  if (!(grid_ratio > 1.0)) throw std::invalid_argument("worst_case_S: grid_ratio must exceed 1");
  if (!(options.seed >= 0.0 && options.seed < 0.5)) throw std::invalid_argument("worst_case_S: seed must lie in [0, 1/2)");
  if (!(options.r1_factor >= 1.0 && options.r2_factor > 1.0 && options.fit_span > 1.0))
    throw std::invalid_argument("worst_case_S: need r1_factor >= 1, r2_factor > 1, fit_span > 1");
  const double lq = std::log(grid_ratio);
  const int N = static_cast<int>(std::floor(std::log(r_max / R) / lq + 1e-9));
  const double band = options.r1_factor * options.r2_factor;
  if (N < 8 || std::pow(grid_ratio, N) < band * options.fit_span)
    throw std::invalid_argument("worst_case_S: r_max / R too small for the band and the fit window");
  // work in index space: log(r/R) = i lq
  const double eps = 1e-9;
  const double i1_min = std::log(options.r1_factor) / lq - eps;
  const double gap = std::log(options.r2_factor) / lq - eps;
  const int j_min = static_cast<int>(std::ceil(i1_min));
  const int i_band = j_min + static_cast<int>(std::ceil(gap));
  WorstCaseReport out;
  out.coarse = grid_ratio > 1.1;
  out.r.resize(static_cast<std::size_t>(N) + 1);
  out.S.resize(out.r.size());
  std::vector<double> Sl(out.r.size());
  for (int i = 0; i <= N; ++i) {
    out.r[i] = R * std::exp(i * lq);
    double s;
    if (i < i_band) {
      s = options.seed;
    } else {
      s = std::numeric_limits<double>::infinity();
      for (int j = j_min; j <= i - gap; ++j)
        s = std::min(s, 0.5 * std::exp(-params.alpha * (i - j) * lq) + 0.5 * Sl[j]);
    }
    out.S[i] = s;
    Sl[i] = std::pow(s, params.l);
  }
  std::vector<std::pair<double, double>> samples;
  for (int i = 0; i <= N; ++i)
    if (out.r[i] >= out.r[N] / options.fit_span * (1 - 1e-12)) samples.emplace_back(out.r[i], out.S[i]);
  out.report = make_report(std::move(samples));
  return out;
}

PipelineReport nonlinear_decay_pipeline(const RadialGridField& data, const PipelineConfig& config,
                                        const ExteriorModeData* exterior) {
  data.validate();
  if (data.spec.d != 3 || data.spec.nu != 0)
    throw std::invalid_argument("nonlinear_decay_pipeline: needs d = 3 radial data (nu = 0)");
  if (!(config.R > 0.0) || !(config.probe_start > 0.0) || !(config.probe_ratio > 1.0) || config.probe_count < 4)
    throw std::invalid_argument(
        "nonlinear_decay_pipeline: need R > 0, probe_start > 0, probe_ratio > 1 and probe_count >= 4");
  if (exterior && (exterior->spec != data.spec || exterior->R > config.R))
    throw std::invalid_argument("nonlinear_decay_pipeline: exterior descriptor must be d = 3 radial with R <= config R");
  PipelineReport rep;
  rep.exploratory = exterior == nullptr;
  for (int k = 0; k < config.probe_count; ++k)
    rep.radii.push_back(config.R * config.probe_start * std::pow(config.probe_ratio, k));
  if (exterior && rep.radii.front() <= exterior->R)
    throw std::invalid_argument("nonlinear_decay_pipeline: probe radii must exceed the exterior radius R");
  if (rep.radii.back() + config.t_final >= data.r.back())
    throw std::invalid_argument("nonlinear_decay_pipeline: largest probe radius plus t_final exceeds the data grid");

  // (a) radiation tail
  const auto G = forward_radiation(data, exterior);
  std::vector<std::pair<double, double>> a;
  double prev = std::numeric_limits<double>::infinity();
  for (double r : rep.radii) {
    const double S = tail_S(G, r);
    if (S > prev) rep.S_nonincreasing = false;
    prev = S;
    a.emplace_back(r, S);
  }
  rep.S_report = make_report(std::move(a));

  // (b) int_{|x|>r} |d_r u0|^2 dx; closed-form tail past the grid when exact
  const double h = data.dr();
  std::vector<double> du(data.r.size());
  for (std::size_t i = 1; i + 1 < du.size(); ++i) du[i] = (data.u[i + 1] - data.u[i - 1]) / (2 * h);
  du.back() = (3 * data.u.back() - 4 * data.u[du.size() - 2] + data.u[du.size() - 3]) / (2 * h);
  std::optional<PowerSum> u0_exact;
  double scale = 1.0;
  if (exterior) {
    u0_exact = lifted_u0(*exterior);
    scale = data.normalization == Normalization::physical ? 1.0 / std::sqrt(sphere_area(3)) : 1.0;
  }
  auto density = [&](std::size_t i) {
    const double r = data.r[i];
    const double d = u0_exact && r > exterior->R ? scale * u0_exact->derivative(r) : du[i];
    return d * d * r * r;
  };
  std::vector<std::pair<double, double>> b;
  for (double r : rep.radii) {
    const std::size_t i0 = static_cast<std::size_t>(std::ceil(r / h - 1e-9));
    double s = 0.0;
    if (u0_exact) {
      // exact power-law integrand: integrate in closed form from r
      for (std::size_t p = 0; p < u0_exact->coeff.size(); ++p)
        for (std::size_t q = 0; q < u0_exact->coeff.size(); ++q) {
          const int e1 = u0_exact->power[p], e2 = u0_exact->power[q];
          const double c = scale * scale * u0_exact->coeff[p] * u0_exact->coeff[q] * e1 * e2;
          const int e = e1 + e2;  // integrand r^{e-2} r^2 = r^e
          if (e >= -1) throw std::domain_error("nonlinear_decay_pipeline: exterior gradient not square integrable");
          s += -c * std::pow(r, e + 1) / (e + 1);
        }
    } else {
      for (std::size_t i = i0; i + 1 < data.r.size(); ++i) s += 0.5 * (density(i) + density(i + 1)) * h;
      s += 0.5 * (density(i0 - 1) + density(i0)) * (data.r[i0] - r);
    }
    b.emplace_back(r, data.measure_factor() * s);
  }
  rep.dr_u0_report = make_report(std::move(b));

  // (c) L^6 tails along the nonlinear run
  SolverConfig cfg;
  cfg.r_max = data.r.back();
  cfg.n_r = static_cast<int>(data.r.size()) - 1;
  cfg.t_final = config.t_final;
  cfg.n_snapshots = config.n_snapshots;
  cfg.cfl = config.cfl;
  cfg.nonlinearity = config.nonlinearity;
  const Trajectory fwd = solve(data, cfg);
  const Trajectory bwd = solve_backward(data, cfg);
  rep.blown_up = fwd.blown_up || bwd.blown_up;
  if (rep.blown_up) {
    rep.diagnostic = "nonlinear run blew up: " + (fwd.blown_up ? fwd.diagnostic : bwd.diagnostic);
    return rep;
  }
  const Trajectory both = merge_two_sided(bwd, fwd);
  std::vector<std::pair<double, double>> c;
  for (double r : rep.radii) {
    const auto tail = l6_tail(both, r);
    rep.l6_truncated = rep.l6_truncated || tail.truncated;
    c.emplace_back(r, tail.value);
  }
  rep.l6_report = make_report(std::move(c));
  return rep;
}

}  // namespace nonrad
