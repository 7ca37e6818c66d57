#include "nonrad/radiation3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nonrad {

const char* to_string(RadiationSide side) { return side == RadiationSide::plus ? "plus" : "minus"; }

double RadiationProfile::angular_factor() const {
  return normalization == Normalization::physical ? sphere_area(mode.d) : 1.0;
}

std::vector<double> RadiationProfile::weights() const {
  std::vector<double> w(s.size(), 0.0);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double h = s[i + 1] - s[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

double RadiationProfile::norm2() const {
  const auto w = weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) sum += w[i] * g[i] * g[i];
  return angular_factor() * sum;
}

void RadiationProfile::validate() const {
  if (s.size() != g.size()) throw std::invalid_argument("RadiationProfile: s and g must have equal length");
  if (s.size() < 2) throw std::invalid_argument("RadiationProfile: need at least 2 samples");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || !std::isfinite(g[i])) throw std::invalid_argument("RadiationProfile: non-finite sample");
    if (i > 0 && !(s[i] > s[i - 1])) throw std::invalid_argument("RadiationProfile: s must be strictly increasing");
  }
}

namespace {

void require_radial3(const RadialGridField& data, const char* who) {
  data.validate();
  if (data.spec.d != 3 || data.spec.nu != 0)
    throw std::invalid_argument(std::string(who) + ": needs d = 3 radial data (nu = 0)");
}

double mode_scale(Normalization n) { return n == Normalization::physical ? 1.0 / std::sqrt(4 * std::numbers::pi) : 1.0; }

// Fourth-order first derivative on a uniform grid from r = 0; `parity` is +1
// for even and -1 for odd functions, used to reflect across the origin.
std::vector<double> derivative4(const std::vector<double>& f, double h, int parity) {
  const std::size_t n = f.size();
  if (n < 5) throw std::invalid_argument("derivative4: need at least 5 samples");
  auto at = [&](long i) { return i >= 0 ? f[static_cast<std::size_t>(i)] : parity * f[static_cast<std::size_t>(-i)]; };
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long j = static_cast<long>(i);
    if (i + 2 < n) {
      d[i] = (at(j - 2) - 8 * at(j - 1) + 8 * at(j + 1) - at(j + 2)) / (12 * h);
    } else if (i + 1 < n) {
      d[i] = (-f[i - 3] + 6 * f[i - 2] - 18 * f[i - 1] + 10 * f[i] + 3 * f[i + 1]) / (12 * h);
    } else {
      d[i] = (25 * f[i] - 48 * f[i - 1] + 36 * f[i - 2] - 16 * f[i - 3] + 3 * f[i - 4]) / (12 * h);
    }
  }
  return d;
}

struct HalfLine {
  std::vector<double> q_prime;  // (r u0)'
  std::vector<double> r_u1;     // r u1
  std::vector<double> u0_prime;
};

HalfLine half_line(const RadialGridField& data, const ExteriorModeData* exterior) {
  const std::size_t n = data.r.size();
  const double h = data.dr();
  HalfLine out;
  std::vector<double> q(n);
  out.r_u1.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = data.r[i] * data.u[i];
    out.r_u1[i] = data.r[i] * data.ut[i];
  }
  out.q_prime = derivative4(q, h, -1);
  out.u0_prime = derivative4(data.u, h, +1);
  if (exterior) {
    if (exterior->spec != data.spec) throw std::invalid_argument("forward_radiation: exterior mode differs from the data's");
    const double scale = mode_scale(data.normalization);
    const PowerSum u0 = lifted_u0(*exterior), u1 = lifted_u1(*exterior);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = data.r[i];
      if (r < exterior->R) continue;
      out.u0_prime[i] = scale * u0.derivative(r);
      out.q_prime[i] = scale * (u0.value(r) + r * u0.derivative(r));
      out.r_u1[i] = u1.empty() ? 0.0 : scale * r * u1.value(r);
    }
  }
  return out;
}

RadiationProfile like(const RadiationProfile& G) {
  RadiationProfile out;
  out.mode = G.mode;
  out.side = G.side;
  out.normalization = G.normalization;
  out.s = G.s;
  out.g.assign(G.g.size(), 0.0);
  return out;
}

}  // namespace

RadiationProfile forward_radiation(const RadialGridField& data, const ExteriorModeData* exterior) {
  require_radial3(data, "forward_radiation");
  const std::size_t n = data.r.size();
  const HalfLine hl = half_line(data, exterior);
  RadiationProfile G;
  G.side = RadiationSide::minus;
  G.normalization = data.normalization;
  G.s.resize(2 * n - 1);
  G.g.resize(2 * n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t up = n - 1 + i, down = n - 1 - i;
    G.s[up] = data.r[i];
    G.s[down] = -data.r[i];
    G.g[up] = kRadiationNormalization * 0.5 * (hl.q_prime[i] + hl.r_u1[i]);
    G.g[down] = kRadiationNormalization * 0.5 * (hl.q_prime[i] - hl.r_u1[i]);
  }
  G.validate();
  return G;
}

RadialGridField inverse_radiation(const RadiationProfile& G) {
  G.validate();
  if (G.mode.d != 3 || G.mode.nu != 0) throw std::invalid_argument("inverse_radiation: needs a d = 3 radial profile");
  const std::size_t m = G.s.size();
  if (m % 2 == 0 || m < 11) throw std::invalid_argument("inverse_radiation: need an odd number (>= 11) of samples");
  const std::size_t n = (m + 1) / 2, mid = n - 1;
  const double h = G.s[mid + 1] - G.s[mid];
  if (std::abs(G.s[mid]) > 1e-12 * h) throw std::invalid_argument("inverse_radiation: the s grid needs a node at 0");
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(G.s[i] - G.s[i - 1] - h) > 1e-9 * h)
      throw std::invalid_argument("inverse_radiation: the s grid must be uniform");
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(G.s[mid + i] + G.s[mid - i]) > 1e-9 * h)
      throw std::invalid_argument("inverse_radiation: the s grid must be symmetric about 0");

  const double c = 1.0 / kRadiationNormalization;
  std::vector<double> e(n), o(n);  // g(s) + g(-s) and g(s) - g(-s)
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = c * (G.g[mid + i] + G.g[mid - i]);
    o[i] = c * (G.g[mid + i] - G.g[mid - i]);
  }
  // q = r u0 = int_0^r e; fourth-order cumulative quadrature, e even
  std::vector<double> q(n, 0.0);
  auto ev = [&](long i) { return e[static_cast<std::size_t>(i < 0 ? -i : i)]; };
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const long k = static_cast<long>(j);
    double piece;
    if (j + 2 < n)
      piece = h / 24 * (-ev(k - 1) + 13 * ev(k) + 13 * ev(k + 1) - ev(k + 2));
    else
      piece = h / 24 * (ev(k - 2) - 5 * ev(k - 1) + 19 * ev(k) + 9 * ev(k + 1));
    q[j + 1] = q[j] + piece;
  }
  RadialGridField f;
  f.spec = {3, 0};
  f.normalization = G.normalization;
  f.r.resize(n);
  f.u.resize(n);
  f.ut.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = i * h;
    f.r[i] = r;
    if (i == 0) {
      f.u[i] = e[0];
      f.ut[i] = (16 * o[1] - 2 * o[2]) / (12 * h);
    } else {
      f.u[i] = q[i] / r;
      f.ut[i] = o[i] / r;
    }
  }
  f.validate();
  return f;
}

std::pair<RadiationProfile, RadiationProfile> split_radiation(const RadiationProfile& G, double r1) {
  if (!(r1 > 0.0)) throw std::invalid_argument("split_radiation: r1 must be positive");
  G.validate();
  auto G1 = like(G), G2 = like(G);
  for (std::size_t i = 0; i < G.s.size(); ++i) (std::abs(G.s[i]) <= r1 ? G1 : G2).g[i] = G.g[i];
  return {G1, G2};
}

std::vector<RadiationProfile> dyadic_split(const RadiationProfile& G, double R0) {
  if (!(R0 > 0.0)) throw std::invalid_argument("dyadic_split: R0 must be positive");
  G.validate();
  double smax = 0.0;
  for (std::size_t i = 0; i < G.s.size(); ++i)
    if (G.g[i] != 0.0) smax = std::max(smax, std::abs(G.s[i]));
  std::vector<RadiationProfile> pieces{like(G)};
  while (std::ldexp(R0, static_cast<int>(pieces.size()) - 1) < smax) pieces.push_back(like(G));
  for (std::size_t i = 0; i < G.s.size(); ++i) {
    const double a = std::abs(G.s[i]);
    std::size_t j = 0;
    while (a > std::ldexp(R0, static_cast<int>(j))) ++j;
    if (j < pieces.size()) pieces[j].g[i] = G.g[i];
  }
  return pieces;
}

double tail_S(const RadiationProfile& G, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("tail_S: r must be nonnegative");
  G.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < G.s.size(); ++i) {
    const double a = G.s[i], b = G.s[i + 1];
    const double fa = G.g[i] * G.g[i], fb = G.g[i + 1] * G.g[i + 1];
    auto lerp = [&](double x) { return fa + (fb - fa) * (x - a) / (b - a); };
    // parts of [a, b] with s > r and with s < -r
    for (auto [lo, hi] : {std::pair{std::max(a, r), b}, std::pair{a, std::min(b, -r)}}) {
      if (hi > lo) sum += 0.5 * (lerp(lo) + lerp(hi)) * (hi - lo);
    }
  }
  return std::sqrt(G.angular_factor() * sum);
}

RadiationProfile numeric_radiation(const Trajectory& traj, double T, double tolerance) {
  if (T == 0.0) throw std::invalid_argument("numeric_radiation: T must be nonzero");
  if (!traj.nonlinearity.linear()) throw std::invalid_argument("numeric_radiation: needs a linear trajectory");
  const std::size_t k1 = traj.nearest_snapshot(T), k2 = traj.nearest_snapshot(2 * T);
  const double t1 = std::abs(traj.times[k1]), t2 = std::abs(traj.times[k2]);
  const double h = traj.dr();
  if (std::abs(traj.times[k2] - 2 * T) > h || std::abs(traj.times[k1] - T) > h || k1 == k2)
    throw std::invalid_argument("numeric_radiation: the trajectory must store snapshots near T and 2T (T = " +
                                std::to_string(T) + ")");
  const int D = traj.spec.lifted_dimension();
  auto extract = [&](std::size_t k, double r) {
    // linear interpolation of r^{(D-1)/2} u_t
    const std::size_t i = std::min(static_cast<std::size_t>(r / h), traj.r.size() - 2);
    const double th = (r - traj.r[i]) / h;
    const double a = std::pow(traj.r[i], 0.5 * (D - 1)) * traj.ut[k][i];
    const double b = std::pow(traj.r[i + 1], 0.5 * (D - 1)) * traj.ut[k][i + 1];
    return (1 - th) * a + th * b;
  };
  RadiationProfile G;
  G.mode = traj.spec;
  G.side = T > 0 ? RadiationSide::plus : RadiationSide::minus;
  G.normalization = traj.normalization;
  double diff2 = 0.0, norm2 = 0.0;
  const double s_hi = std::min(traj.r_clean[k1] - t1, traj.r_clean[k2] - t2) - 2 * h;
  for (std::size_t i = 0; i < traj.r.size(); ++i) {
    const double s = traj.r[i] - t2;
    if (s < -t1 || s > s_hi) continue;
    const double late = std::pow(traj.r[i], 0.5 * (D - 1)) * traj.ut[k2][i];
    const double early = extract(k1, s + t1);
    G.s.push_back(s);
    G.g.push_back(late);
    diff2 += (late - early) * (late - early);
    norm2 += late * late;
  }
  if (G.s.size() < 2)
    throw std::invalid_argument("numeric_radiation: no clean samples; enlarge r_max relative to 2|T|");
  G.stabilization = norm2 > 0 ? std::sqrt(diff2 / norm2) : std::sqrt(diff2);
  G.stabilized = G.stabilization <= tolerance;
  return G;
}

IsometryReport isometry(const RadialGridField& data, const ExteriorModeData* exterior) {
  require_radial3(data, "isometry");
  const HalfLine hl = half_line(data, exterior);
  const auto G = forward_radiation(data, exterior);
  const double h = data.dr();
  IsometryReport rep;
  double sum = 0.0;
  for (std::size_t i = 0; i < data.r.size(); ++i) {
    const double w = (i == 0 || i + 1 == data.r.size()) ? 0.5 * h : h;
    const double r = data.r[i];
    sum += w * r * r * (hl.u0_prime[i] * hl.u0_prime[i] + data.ut[i] * data.ut[i]);
  }
  rep.energy = data.measure_factor() * sum;
  if (exterior) {
    const auto ext = exterior_descriptor(*exterior, data.normalization);
    rep.energy += data.measure_factor() * ext.field.energy_beyond(data.r.back(), 0.0);
  }
  rep.twice_norm2 = 2 * G.norm2();
  rep.relative = rep.energy > 0 ? std::abs(rep.energy - rep.twice_norm2) / rep.energy : std::abs(rep.twice_norm2);
  return rep;
}

ChannelReport channel_identity(const RadialGridField& data, double R, const ChannelConfig& config,
                               const ExteriorModeData* exterior) {
  require_radial3(data, "channel_identity");
  if (!(R > 0.0)) throw std::invalid_argument("channel_identity: R must be positive");
  SolverConfig cfg;
  cfg.r_max = data.r.back();
  cfg.n_r = static_cast<int>(data.r.size()) - 1;
  cfg.cfl = config.cfl;
  cfg.t_final = config.t_final;
  cfg.n_snapshots = config.n_snapshots;
  if (exterior) cfg.exterior = exterior_descriptor(*exterior, data.normalization);
  const Trajectory both = merge_two_sided(solve_backward(data, cfg), solve_mode_linear(data, cfg));
  ChannelReport rep;
  ConeLimit plus, minus;
  try {
    plus = cone_energy_limit(both, R, +1);
    minus = cone_energy_limit(both, R, -1);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("channel_identity: ") + e.what() +
                                " (the data grid must reach well beyond R + 2 t_final)");
  }
  rep.limit_plus = plus.limit;
  rep.limit_minus = minus.limit;
  rep.lhs = plus.limit + minus.limit;
  rep.cauchy = plus.cauchy + minus.cauchy;
  rep.truncated = plus.truncated || minus.truncated;
  const double S = tail_S(forward_radiation(data, exterior), R);
  rep.rhs = 2 * S * S;
  rep.energy = isometry(data, exterior).energy;
  // identities that hold as 0 = 0 are judged against the data energy
  const double scale = std::max(std::abs(rep.rhs), 1e-6 * rep.energy);
  rep.stabilized =
      rep.cauchy <= config.tolerance * std::max({std::abs(rep.lhs), scale, config.floor_fraction * rep.energy});
  rep.relative = std::abs(rep.lhs - rep.rhs) / scale;
  return rep;
}

}  // namespace nonrad
