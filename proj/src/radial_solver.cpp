#include "nonrad/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace nonrad {

const char* to_string(Normalization n) { return n == Normalization::physical ? "physical" : "mode_coefficient"; }

Normalization normalization_from_string(const std::string& name) {
  if (name == "physical") return Normalization::physical;
  if (name == "mode_coefficient") return Normalization::mode_coefficient;
  throw std::invalid_argument("unknown normalization '" + name + "' (expected physical or mode_coefficient)");
}

double sphere_area(int d) { return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d); }

double RadialGridField::measure_factor() const {
  return normalization == Normalization::physical ? sphere_area(spec.d) : 1.0;
}

void RadialGridField::validate() const {
  spec.validate();
  if (normalization == Normalization::physical && spec.nu != 0)
    throw std::invalid_argument("RadialGridField: physical normalization needs nu = 0");
  if (r.size() < 3) throw std::invalid_argument("RadialGridField: need at least 3 grid nodes");
  if (u.size() != r.size() || ut.size() != r.size())
    throw std::invalid_argument("RadialGridField: u, ut and r must have equal length");
  const double h = dr();
  if (r[0] != 0.0 || !(h > 0.0)) throw std::invalid_argument("RadialGridField: grid must start at r = 0 and increase");
  for (std::size_t i = 1; i < r.size(); ++i)
    if (std::abs(r[i] - r[i - 1] - h) > 1e-9 * h) throw std::invalid_argument("RadialGridField: grid must be uniform");
  for (std::size_t i = 0; i < r.size(); ++i)
    if (!std::isfinite(u[i]) || !std::isfinite(ut[i])) throw std::invalid_argument("RadialGridField: non-finite data");
}

std::vector<double> uniform_grid(double r_max, int n_r) {
  if (!(r_max > 0.0) || n_r < 2) throw std::invalid_argument("uniform_grid: need r_max > 0 and n_r >= 2");
  std::vector<double> r(static_cast<std::size_t>(n_r) + 1);
  for (int i = 0; i <= n_r; ++i) r[static_cast<std::size_t>(i)] = r_max * i / n_r;
  return r;
}

RadialGridField field_from_mode(const ExteriorModeData& data, double r_max, int n_r, int blend_order,
                                Normalization normalization) {
  RadialGridField f;
  f.spec = data.spec;
  f.normalization = normalization;
  f.r = uniform_grid(r_max, n_r);
  const double scale = normalization == Normalization::physical ? 1.0 / std::sqrt(sphere_area(data.spec.d)) : 1.0;
  f.u = extend_to_grid(lifted_u0(data), data.R, f.r, blend_order);
  f.ut = extend_to_grid(lifted_u1(data), data.R, f.r, blend_order);
  for (auto& v : f.u) v *= scale;
  for (auto& v : f.ut) v *= scale;
  f.validate();
  return f;
}

RadialGridField field_from_functions(const ModeSpec& spec, double r_max, int n_r,
                                     const std::function<double(double)>& u0,
                                     const std::function<double(double)>& u1, Normalization normalization) {
  RadialGridField f;
  f.spec = spec;
  f.normalization = normalization;
  f.r = uniform_grid(r_max, n_r);
  for (double r : f.r) {
    f.u.push_back(u0 ? u0(r) : 0.0);
    f.ut.push_back(u1 ? u1(r) : 0.0);
  }
  f.validate();
  return f;
}

namespace {

// Trapezoid rule for measure * int g(r) r^{D-1} dr over nodes [i0, i1] of a
// uniform grid.
double trapezoid(const std::vector<double>& r, const std::vector<double>& g, int D, std::size_t i0, std::size_t i1) {
  double s = 0.0;
  for (std::size_t i = i0; i + 1 <= i1; ++i) {
    const double a = g[i] * std::pow(r[i], D - 1), b = g[i + 1] * std::pow(r[i + 1], D - 1);
    s += 0.5 * (a + b) * (r[i + 1] - r[i]);
  }
  return s;
}

std::vector<double> gradient(const std::vector<double>& u, double h) {
  const std::size_t n = u.size();
  std::vector<double> g(n);
  g[0] = 0.0;  // regular data are even in r
  for (std::size_t i = 1; i + 1 < n; ++i) g[i] = (u[i + 1] - u[i - 1]) / (2 * h);
  g[n - 1] = (3 * u[n - 1] - 4 * u[n - 2] + u[n - 3]) / (2 * h);
  return g;
}

}  // namespace

ExteriorDescriptor exterior_descriptor(const ExteriorModeData& data, Normalization normalization) {
  ExactField field = ExactField::from_mode(data);
  if (normalization == Normalization::physical) {
    if (data.spec.nu != 0) throw std::invalid_argument("exterior_descriptor: physical normalization needs nu = 0");
    // 1/sqrt|S^{d-1}| is irrational; a 1e-17 relative rounding is immaterial here
    field = ExactField(field.D(), scaled(field.expression(), Rational(1.0 / std::sqrt(sphere_area(data.spec.d)))));
  }
  return {field, data.R};
}

double field_energy(const RadialGridField& f) {
  const int D = f.spec.lifted_dimension();
  const auto g = gradient(f.u, f.dr());
  std::vector<double> dens(f.r.size());
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = f.ut[i] * f.ut[i] + g[i] * g[i];
  return f.measure_factor() * trapezoid(f.r, dens, D, 0, f.r.size() - 1);
}

const char* to_string(Scheme s) { return s == Scheme::leapfrog ? "leapfrog" : "rk4_mol"; }

const char* to_string(OuterBoundary b) {
  switch (b) {
    case OuterBoundary::dirichlet: return "dirichlet";
    case OuterBoundary::neumann: return "neumann";
    case OuterBoundary::sommerfeld: return "sommerfeld";
    case OuterBoundary::exact: return "exact";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "leapfrog") return Scheme::leapfrog;
  if (name == "rk4_mol") return Scheme::rk4_mol;
  throw std::invalid_argument("unknown scheme '" + name + "' (expected leapfrog or rk4_mol)");
}

OuterBoundary boundary_from_string(const std::string& name) {
  if (name == "dirichlet") return OuterBoundary::dirichlet;
  if (name == "neumann") return OuterBoundary::neumann;
  if (name == "sommerfeld") return OuterBoundary::sommerfeld;
  if (name == "exact") return OuterBoundary::exact;
  throw std::invalid_argument("unknown boundary '" + name + "' (expected dirichlet, neumann, sommerfeld or exact)");
}

Nonlinearity Nonlinearity::custom(std::function<double(double)> f, double C, std::function<double(double)> G) {
  if (!f) throw std::invalid_argument("Nonlinearity::custom: empty force");
  if (!(C >= 0.0)) throw std::invalid_argument("Nonlinearity::custom: C must be nonnegative");
  for (int i = -400; i <= 400; ++i) {
    const double u = i / 40.0;
    const double v = f(u);
    if (!std::isfinite(v) || std::abs(v) > C * std::pow(std::abs(u), 5) * (1 + 1e-12) + 1e-300)
      throw std::invalid_argument("Nonlinearity::custom: |F(u)| <= C|u|^5 fails at u = " + std::to_string(u));
  }
  return {Kind::custom, std::move(f), std::move(G), C};
}

double Nonlinearity::F(double u) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::defocusing_quintic: return -std::pow(u, 5);
    case Kind::focusing_quintic: return std::pow(u, 5);
    case Kind::custom: return force(u);
  }
  return 0.0;
}

double Nonlinearity::G(double u) const {
  switch (kind) {
    case Kind::none: return 0.0;
    case Kind::defocusing_quintic: return std::pow(u, 6) / 6.0;
    case Kind::focusing_quintic: return -std::pow(u, 6) / 6.0;
    case Kind::custom: return potential ? potential(u) : 0.0;
  }
  return 0.0;
}

std::string Nonlinearity::name() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::defocusing_quintic: return "defocusing_quintic";
    case Kind::focusing_quintic: return "focusing_quintic";
    case Kind::custom: return "custom";
  }
  return "unknown";
}

Nonlinearity nonlinearity_from_string(const std::string& name) {
  if (name == "none") return Nonlinearity::none();
  if (name == "defocusing_quintic") return Nonlinearity::defocusing();
  if (name == "focusing_quintic") return Nonlinearity::focusing();
  throw std::invalid_argument("unknown nonlinearity '" + name +
                              "' (expected none, defocusing_quintic or focusing_quintic)");
}

void SolverConfig::validate() const {
  if (!(r_max > 0.0)) throw std::invalid_argument("SolverConfig: r_max must be positive");
  if (n_r < 8) throw std::invalid_argument("SolverConfig: n_r must be at least 8");
  if (!(cfl > 0.0 && cfl < 1.0)) throw std::invalid_argument("SolverConfig: cfl must lie in (0, 1)");
  if (!(t_final > 0.0)) throw std::invalid_argument("SolverConfig: t_final must be positive");
  if (n_snapshots < 2) throw std::invalid_argument("SolverConfig: n_snapshots must be at least 2");
  if (boundary == OuterBoundary::exact && !exterior)
    throw std::invalid_argument("SolverConfig: exact boundary needs an exterior descriptor");
}

double Trajectory::measure_factor() const {
  return normalization == Normalization::physical ? sphere_area(spec.d) : 1.0;
}

RadialGridField Trajectory::snapshot(std::size_t k) const { return {spec, r, u.at(k), ut.at(k), normalization}; }

std::size_t Trajectory::nearest_snapshot(double t) const {
  std::size_t best = 0;
  for (std::size_t k = 1; k < times.size(); ++k)
    if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
  return best;
}

namespace {

// Mass and stiffness of the finite-volume operator: M u_tt = -K u.
struct Operator {
  int D = 3;
  double h = 0.0;
  std::size_t n = 0;          // number of nodes
  std::vector<double> mass;   // cell volumes
  std::vector<double> face;   // face weights / h, face i between nodes i and i+1
  bool neumann = false;

  Operator(const std::vector<double>& r, int dim, bool neumann_end) : D(dim), neumann(neumann_end) {
    n = r.size();
    h = r[1] - r[0];
    mass.resize(n);
    face.resize(n - 1);
    auto vol = [&](double a, double b) { return (std::pow(b, D) - std::pow(a, D)) / D; };
    mass[0] = vol(0.0, 0.5 * h);
    for (std::size_t i = 1; i < n; ++i) mass[i] = vol(r[i] - 0.5 * h, i + 1 < n ? r[i] + 0.5 * h : r[i]);
    if (!neumann) mass[n - 1] = vol(r[n - 1] - 0.5 * h, r[n - 1] + 0.5 * h);
    face[0] = std::pow(0.5 * h, D - 1) / h;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      // harmonic weight h / int r^{1-D}, so r^{2-D} is discretely static
      const double a = r[i], b = r[i + 1];
      const double inv = D == 2 ? std::log(b / a) : (std::pow(a, 2 - D) - std::pow(b, 2 - D)) / (D - 2);
      face[i] = 1.0 / inv;
    }
  }

  // (L u)_i for interior nodes and, with Neumann, the last node.
  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      double flux = face[i] * (u[i + 1] - u[i]);
      if (i > 0) flux -= face[i - 1] * (u[i] - u[i - 1]);
      out[i] = flux / mass[i];
    }
    out[n - 1] = neumann ? -face[n - 2] * (u[n - 1] - u[n - 2]) / mass[n - 1] : 0.0;
  }

  // u^T K v
  double stiffness(const std::vector<double>& u, const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) s += face[i] * (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
    return s;
  }

  // Largest eigenvalue of M^{-1} K: power iteration from the sawtooth mode,
  // padded by 5% and capped by the Gershgorin bound.
  double spectral_bound() const {
    double gersh = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double diag = 0.0, off = 0.0;
      if (i + 1 < n) {
        diag += face[i];
        off += face[i] / std::sqrt(mass[i] * mass[i + 1]);
      }
      if (i > 0) {
        diag += face[i - 1];
        off += face[i - 1] / std::sqrt(mass[i] * mass[i - 1]);
      }
      gersh = std::max(gersh, diag / mass[i] + off);
    }
    // symmetric form: y = M^{1/2} u, A y = M^{-1/2} K M^{-1/2} y
    std::vector<double> y(n), u(n), Ku(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = (i % 2 ? -1.0 : 1.0) * (1.0 + 1e-3 * static_cast<double>(i % 7));
    double lam = 0.0;
    for (int it = 0; it < 300; ++it) {
      double norm = 0.0;
      for (double v : y) norm += v * v;
      norm = std::sqrt(norm);
      for (std::size_t i = 0; i < n; ++i) u[i] = y[i] / norm / std::sqrt(mass[i]);
      std::fill(Ku.begin(), Ku.end(), 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double flux = face[i] * (u[i + 1] - u[i]);
        Ku[i] -= flux;
        Ku[i + 1] += flux;
      }
      lam = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = Ku[i] / std::sqrt(mass[i]);
        lam += u[i] * Ku[i];
      }
    }
    return std::min(gersh, 1.05 * lam);
  }
};

struct Source {
  const Nonlinearity* nl = nullptr;
  double scale = 1.0;  // physical field = scale * stored field

  double F(double c) const { return nl->F(scale * c) / scale; }
  double G2(double c) const { return 2.0 * nl->G(scale * c) / (scale * scale); }
};

struct Runner {
  const RadialGridField& init;
  const SolverConfig& cfg;
  Operator op;
  Source src;
  double dt = 0.0;
  int steps_per_snapshot = 1;
  int stencil = 1;

  Runner(const RadialGridField& f, const SolverConfig& c)
      : init(f), cfg(c), op(f.r, f.spec.lifted_dimension(), c.boundary == OuterBoundary::neumann) {
    src.nl = &cfg.nonlinearity;
    src.scale = f.normalization == Normalization::physical ? 1.0 : 1.0 / std::sqrt(sphere_area(f.spec.d));
    const double lam = op.spectral_bound();
    const double dt_max = cfg.cfl * std::min(op.h, 2.0 / std::sqrt(lam));
    const double span = cfg.t_final / (cfg.n_snapshots - 1);
    steps_per_snapshot = std::max(1, static_cast<int>(std::ceil(span / dt_max)));
    dt = span / steps_per_snapshot;
    stencil = cfg.scheme == Scheme::leapfrog ? 1 : 4;
  }

  double clean_radius(long steps) const {
    if (cfg.boundary == OuterBoundary::exact) return init.r.back();
    return init.r.back() - static_cast<double>(steps + 1) * stencil * op.h - 2 * op.h;
  }

  double energy_density_potential(const std::vector<double>& u) const {
    if (cfg.nonlinearity.linear()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += op.mass[i] * src.G2(u[i]);
    return s;
  }

  double boundary_value(double t, const std::vector<double>& u) const {
    const std::size_t N = u.size() - 1;
    switch (cfg.boundary) {
      case OuterBoundary::exact: return cfg.exterior->field.eval(init.r[N], t).u;
      default: return u[N];
    }
  }

  bool blown(const std::vector<double>& u) const {
    for (double v : u)
      if (!std::isfinite(v) || std::abs(v) > cfg.blowup_threshold) return true;
    return false;
  }

  Trajectory start() const {
    Trajectory tr;
    tr.spec = init.spec;
    tr.normalization = init.normalization;
    tr.r = init.r;
    tr.dt = dt;
    tr.nonlinearity = cfg.nonlinearity;
    tr.exterior = cfg.exterior;
    return tr;
  }

  Trajectory leapfrog() const {
    const std::size_t n = init.r.size(), N = n - 1;
    const double r_N = init.r[N];
    const int Dm1 = op.D - 1;
    std::vector<double> prev(n), cur = init.u, next(n), acc(n);
    auto accel = [&](const std::vector<double>& u, std::vector<double>& a) {
      op.apply(u, a);
      if (!cfg.nonlinearity.linear())
        for (std::size_t i = 0; i < n; ++i) a[i] += src.F(u[i]);
    };
    auto boundary_update = [&](const std::vector<double>& u_now, const std::vector<double>& u_old, double t_next,
                               std::vector<double>& u_new) {
      switch (cfg.boundary) {
        case OuterBoundary::dirichlet: u_new[N] = u_now[N]; break;
        case OuterBoundary::neumann: break;
        case OuterBoundary::exact: u_new[N] = cfg.exterior->field.eval(r_N, t_next).u; break;
        case OuterBoundary::sommerfeld:
          u_new[N] = u_now[N] + dt * (-(u_now[N] - u_now[N - 1]) / op.h - 0.5 * Dm1 / r_N * u_now[N]);
          break;
      }
      (void)u_old;
    };
    // u^{-1} from the Taylor start; leapfrog from (u^{-1}, u^0) reproduces u^1 = u^0 + dt u1 + dt^2/2 a^0.
    accel(cur, acc);
    for (std::size_t i = 0; i < n; ++i) prev[i] = cur[i] - dt * init.ut[i] + 0.5 * dt * dt * acc[i];
    if (cfg.boundary == OuterBoundary::exact) prev[N] = cfg.exterior->field.eval(r_N, -dt).u;
    if (cfg.boundary == OuterBoundary::dirichlet) prev[N] = cur[N];

    Trajectory tr = start();
    auto staggered_energy = [&](const std::vector<double>& a, const std::vector<double>& b) {
      double kin = 0.0;
      for (std::size_t i = 0; i < n; ++i) kin += op.mass[i] * std::pow((b[i] - a[i]) / dt, 2);
      return kin + op.stiffness(a, b) + 0.5 * (energy_density_potential(a) + energy_density_potential(b));
    };
    double e_before = staggered_energy(prev, cur);
    long step = 0;
    const long total = static_cast<long>(steps_per_snapshot) * (cfg.n_snapshots - 1);
    for (;;) {
      accel(cur, acc);
      for (std::size_t i = 0; i < n; ++i) next[i] = 2 * cur[i] - prev[i] + dt * dt * acc[i];
      boundary_update(cur, prev, (step + 1) * dt, next);
      if (step % steps_per_snapshot == 0) {
        const double e_after = staggered_energy(cur, next);
        tr.times.push_back(step * dt);
        tr.u.push_back(cur);
        std::vector<double> vel(n);
        for (std::size_t i = 0; i < n; ++i) vel[i] = (next[i] - prev[i]) / (2 * dt);
        if (cfg.boundary == OuterBoundary::exact) vel[N] = cfg.exterior->field.eval(r_N, step * dt).ut;
        tr.ut.push_back(std::move(vel));
        tr.energy.push_back(init.measure_factor() * 0.5 * (e_before + e_after));
        tr.r_clean.push_back(clean_radius(step));
      }
      if (step == total) break;
      if (blown(next)) {
        tr.blown_up = true;
        std::ostringstream msg;
        msg << "blow-up: |u| exceeded " << cfg.blowup_threshold << " or became non-finite at t = " << (step + 1) * dt;
        tr.diagnostic = msg.str();
        break;
      }
      e_before = staggered_energy(cur, next);
      prev.swap(cur);
      cur.swap(next);
      ++step;
    }
    tr.steps = step;
    return tr;
  }

  Trajectory rk4() const {
    const std::size_t n = init.r.size(), N = n - 1;
    const double r_N = init.r[N];
    const int Dm1 = op.D - 1;
    auto rhs = [&](double t, const std::vector<double>& u, const std::vector<double>& v, std::vector<double>& du,
                   std::vector<double>& dv) {
      op.apply(u, dv);
      for (std::size_t i = 0; i < n; ++i) {
        du[i] = v[i];
        if (!cfg.nonlinearity.linear()) dv[i] += src.F(u[i]);
      }
      switch (cfg.boundary) {
        case OuterBoundary::dirichlet:
          du[N] = 0.0;
          dv[N] = 0.0;
          break;
        case OuterBoundary::neumann: break;
        case OuterBoundary::exact:
          du[N] = cfg.exterior->field.eval(r_N, t).ut;
          dv[N] = cfg.exterior->field.utt(r_N, t);
          break;
        case OuterBoundary::sommerfeld:
          du[N] = -(u[N] - u[N - 1]) / op.h - 0.5 * Dm1 / r_N * u[N];
          dv[N] = 0.0;
          break;
      }
    };
    std::vector<double> u = init.u, v = init.ut;
    if (cfg.boundary == OuterBoundary::dirichlet) v[N] = 0.0;
    std::vector<double> k1u(n), k1v(n), k2u(n), k2v(n), k3u(n), k3v(n), k4u(n), k4v(n), tu(n), tv(n);
    Trajectory tr = start();
    long step = 0;
    const long total = static_cast<long>(steps_per_snapshot) * (cfg.n_snapshots - 1);
    for (;;) {
      const double t = step * dt;
      if (step % steps_per_snapshot == 0) {
        tr.times.push_back(t);
        tr.u.push_back(u);
        std::vector<double> vel = v;
        if (cfg.boundary == OuterBoundary::sommerfeld) {
          rhs(t, u, v, k1u, k1v);
          vel[N] = k1u[N];
        }
        tr.ut.push_back(std::move(vel));
        double kin = 0.0;
        for (std::size_t i = 0; i < n; ++i) kin += op.mass[i] * v[i] * v[i];
        tr.energy.push_back(init.measure_factor() * (kin + op.stiffness(u, u) + energy_density_potential(u)));
        tr.r_clean.push_back(clean_radius(step));
      }
      if (step == total) break;
      rhs(t, u, v, k1u, k1v);
      for (std::size_t i = 0; i < n; ++i) {
        tu[i] = u[i] + 0.5 * dt * k1u[i];
        tv[i] = v[i] + 0.5 * dt * k1v[i];
      }
      rhs(t + 0.5 * dt, tu, tv, k2u, k2v);
      for (std::size_t i = 0; i < n; ++i) {
        tu[i] = u[i] + 0.5 * dt * k2u[i];
        tv[i] = v[i] + 0.5 * dt * k2v[i];
      }
      rhs(t + 0.5 * dt, tu, tv, k3u, k3v);
      for (std::size_t i = 0; i < n; ++i) {
        tu[i] = u[i] + dt * k3u[i];
        tv[i] = v[i] + dt * k3v[i];
      }
      rhs(t + dt, tu, tv, k4u, k4v);
      for (std::size_t i = 0; i < n; ++i) {
        u[i] += dt / 6 * (k1u[i] + 2 * k2u[i] + 2 * k3u[i] + k4u[i]);
        v[i] += dt / 6 * (k1v[i] + 2 * k2v[i] + 2 * k3v[i] + k4v[i]);
      }
      if (cfg.boundary == OuterBoundary::exact) {
        const auto e = cfg.exterior->field.eval(r_N, t + dt);
        u[N] = e.u;
        v[N] = e.ut;
      }
      ++step;
      if (blown(u)) {
        tr.blown_up = true;
        std::ostringstream msg;
        msg << "blow-up: |u| exceeded " << cfg.blowup_threshold << " or became non-finite at t = " << step * dt;
        tr.diagnostic = msg.str();
        break;
      }
    }
    tr.steps = step;
    return tr;
  }
};

Trajectory run(const RadialGridField& initial, const SolverConfig& config) {
  config.validate();
  initial.validate();
  if (config.exterior && config.exterior->field.D() != initial.spec.lifted_dimension())
    throw std::invalid_argument("solve: exterior descriptor dimension differs from the data's lifted dimension");
  Runner runner(initial, config);
  return config.scheme == Scheme::leapfrog ? runner.leapfrog() : runner.rk4();
}

}  // namespace

Trajectory solve_mode_linear(const RadialGridField& initial, const SolverConfig& config) {
  if (!config.nonlinearity.linear())
    throw std::invalid_argument("solve_mode_linear: config carries a nonlinearity; use solve_quintic");
  return run(initial, config);
}

Trajectory solve_quintic(const RadialGridField& initial, const SolverConfig& config) {
  if (initial.spec.d != 3 || initial.spec.nu != 0)
    throw std::invalid_argument("solve_quintic: needs three-dimensional radial data (d = 3, nu = 0)");
  if (config.exterior && !config.nonlinearity.linear())
    throw std::invalid_argument("solve_quintic: an exact exterior descriptor only applies to linear runs");
  return run(initial, config);
}

Trajectory solve(const RadialGridField& initial, const SolverConfig& config) {
  return config.nonlinearity.linear() ? solve_mode_linear(initial, config) : solve_quintic(initial, config);
}

Trajectory solve_backward(const RadialGridField& initial, const SolverConfig& config) {
  RadialGridField flipped = initial;
  for (auto& v : flipped.ut) v = -v;
  SolverConfig cfg = config;
  if (cfg.exterior) cfg.exterior->field = cfg.exterior->field.time_reversed();
  Trajectory tr = solve(flipped, cfg);
  std::reverse(tr.times.begin(), tr.times.end());
  for (auto& t : tr.times) t = -t;
  std::reverse(tr.u.begin(), tr.u.end());
  std::reverse(tr.ut.begin(), tr.ut.end());
  for (auto& row : tr.ut)
    for (auto& v : row) v = -v;
  std::reverse(tr.energy.begin(), tr.energy.end());
  std::reverse(tr.r_clean.begin(), tr.r_clean.end());
  tr.exterior = config.exterior;
  return tr;
}

Trajectory merge_two_sided(const Trajectory& backward, const Trajectory& forward) {
  if (backward.times.empty() || forward.times.empty() || backward.times.back() != 0.0 || forward.times.front() != 0.0)
    throw std::invalid_argument("merge_two_sided: runs must meet at t = 0");
  if (backward.r != forward.r) throw std::invalid_argument("merge_two_sided: grids differ");
  Trajectory out = forward;
  out.times.assign(backward.times.begin(), backward.times.end() - 1);
  out.u.assign(backward.u.begin(), backward.u.end() - 1);
  out.ut.assign(backward.ut.begin(), backward.ut.end() - 1);
  out.energy.assign(backward.energy.begin(), backward.energy.end() - 1);
  out.r_clean.assign(backward.r_clean.begin(), backward.r_clean.end() - 1);
  out.times.insert(out.times.end(), forward.times.begin(), forward.times.end());
  out.u.insert(out.u.end(), forward.u.begin(), forward.u.end());
  out.ut.insert(out.ut.end(), forward.ut.begin(), forward.ut.end());
  out.energy.insert(out.energy.end(), forward.energy.begin(), forward.energy.end());
  out.r_clean.insert(out.r_clean.end(), forward.r_clean.begin(), forward.r_clean.end());
  out.blown_up = backward.blown_up || forward.blown_up;
  out.steps = backward.steps + forward.steps;
  return out;
}

namespace {

// int_a^b g(r) r^{D-1} dr with g sampled on the uniform grid; trapezoid with
// linear interpolation at the endpoints.
double integrate_between(const std::vector<double>& r, const std::vector<double>& g, int D, double a, double b) {
  if (!(b > a)) return 0.0;
  const double h = r[1] - r[0];
  auto w = [&](double x, double gx) { return gx * std::pow(x, D - 1); };
  auto interp = [&](double x) {
    std::size_t i = std::min(static_cast<std::size_t>(x / h), r.size() - 2);
    const double th = (x - r[i]) / h;
    return (1 - th) * g[i] + th * g[i + 1];
  };
  const std::size_t ia = static_cast<std::size_t>(std::floor(a / h)) + 1;
  const std::size_t ib = std::min(static_cast<std::size_t>(std::floor(b / h)), r.size() - 1);
  if (ia > ib) return 0.5 * (w(a, interp(a)) + w(b, interp(b))) * (b - a);
  double s = 0.5 * (w(a, interp(a)) + w(r[ia], g[ia])) * (r[ia] - a);
  for (std::size_t i = ia; i < ib; ++i) s += 0.5 * (w(r[i], g[i]) + w(r[i + 1], g[i + 1])) * h;
  s += 0.5 * (w(r[ib], g[ib]) + w(b, interp(b))) * (b - r[ib]);
  return s;
}

// int_a^inf f(field at rho) rho^{D-1} drho via rho = a / z and Gauss-Legendre.
template <typename F>
double analytic_tail(const ExactField& field, double a, double t, F&& f) {
  static const QuadratureRule rule = gauss_nodes(96);
  const int D = field.D();
  return rule.integrate(
      [&](double z) {
        const double rho = a / z;
        return f(field.eval(rho, t)) * std::pow(rho, D - 1) * a / (z * z);
      },
      0.0, 1.0);
}

void require_clean(const Trajectory& traj, std::size_t k, double inner, const char* who) {
  if (!(inner < traj.r_clean[k]))
    throw std::invalid_argument(std::string(who) + ": cone radius " + std::to_string(inner) + " at t = " +
                                std::to_string(traj.times[k]) + " reaches the boundary-contaminated region (clean up to " +
                                std::to_string(traj.r_clean[k]) + "); enlarge r_max");
}

// True when the field near the clean edge is negligible, so truncation there
// loses nothing.
bool negligible_beyond(const Trajectory& traj, std::size_t k, double b) {
  double edge = 0.0, peak = 0.0;
  const double h = traj.dr();
  for (std::size_t i = 0; i < traj.r.size(); ++i) {
    const double v = std::abs(traj.u[k][i]) + std::abs(traj.ut[k][i]);
    peak = std::max(peak, v);
    if (traj.r[i] >= b - 4 * h && traj.r[i] <= b) edge = std::max(edge, v);
  }
  return edge <= 1e-12 * std::max(peak, 1e-300);
}

}  // namespace

std::vector<ConeEnergySample> cone_energy(const Trajectory& traj, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("cone_energy: R must be positive");
  const int D = traj.spec.lifted_dimension();
  const double h = traj.dr();
  std::vector<ConeEnergySample> out;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double t = traj.times[k];
    const double a = R + std::abs(t);
    require_clean(traj, k, a, "cone_energy");
    const auto g = gradient(traj.u[k], h);
    std::vector<double> dens(traj.r.size());
    for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = traj.ut[k][i] * traj.ut[k][i] + g[i] * g[i];
    // stay two cells inside the clean region so the gradient stencil is clean too
    const double b = std::min(traj.r_clean[k], traj.r.back()) - 2 * h;
    ConeEnergySample s{t, 0.0, false};
    s.energy = integrate_between(traj.r, dens, D, a, std::max(a, b));
    if (traj.exterior && b > traj.exterior->R + std::abs(t)) {
      s.energy += traj.exterior->field.energy_beyond(std::max(a, b), t);
    } else {
      s.truncated = !negligible_beyond(traj, k, b);
    }
    s.energy *= traj.measure_factor();
    out.push_back(s);
  }
  return out;
}

ConeLimit cone_energy_limit(const Trajectory& traj, double R, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("cone_energy_limit: sign must be +1 or -1");
  const auto series = cone_energy(traj, R);
  double T = 0.0;
  for (double t : traj.times) T = std::max(T, sign * t);
  if (!(T > 0.0)) throw std::invalid_argument("cone_energy_limit: no samples on the requested side");
  auto sample = [&](double t) {
    const std::size_t k = traj.nearest_snapshot(sign * t);
    return series[k];
  };
  const auto s4 = sample(0.25 * T), s2 = sample(0.5 * T), s1 = sample(T);
  auto extrapolate = [&](const ConeEnergySample& p, const ConeEnergySample& q) {
    const double x1 = 1.0 / (R + std::abs(p.t)), x2 = 1.0 / (R + std::abs(q.t));
    return (q.energy * x1 - p.energy * x2) / (x1 - x2);
  };
  ConeLimit lim;
  lim.t_half = s2.t;
  lim.t_end = s1.t;
  lim.e_half = s2.energy;
  lim.e_end = s1.energy;
  lim.limit = extrapolate(s2, s1);
  lim.cauchy = std::abs(lim.limit - extrapolate(s4, s2));
  lim.truncated = s1.truncated || s2.truncated || s4.truncated;
  return lim;
}

namespace {

// measure * int_{a}^{inf} |u|^p dx in physical units at snapshot k.
double power_tail(const Trajectory& traj, std::size_t k, double a, int p, bool& truncated) {
  const int D = traj.spec.lifted_dimension();
  const double h = traj.dr();
  const double scale =
      traj.normalization == Normalization::physical ? 1.0 : 1.0 / std::sqrt(sphere_area(traj.spec.d));
  std::vector<double> g(traj.r.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::pow(std::abs(scale * traj.u[k][i]), p);
  const double b = std::min(traj.r_clean[k], traj.r.back()) - h;
  double s = integrate_between(traj.r, g, D, a, std::max(a, b));
  if (traj.exterior && traj.nonlinearity.linear() && b > traj.exterior->R + std::abs(traj.times[k])) {
    s += analytic_tail(traj.exterior->field, std::max(a, b), traj.times[k],
                       [&](const PointValues& v) { return std::pow(std::abs(scale * v.u), p); });
  } else if (!negligible_beyond(traj, k, b)) {
    truncated = true;
  }
  return s * sphere_area(traj.spec.d);
}

}  // namespace

YNormEstimate ynorm_estimate(const Trajectory& traj, double r) {
  if (traj.spec.nu != 0) throw std::invalid_argument("ynorm_estimate: needs a radial (nu = 0) trajectory");
  YNormEstimate est;
  const std::size_t n = traj.times.size();
  std::vector<double> inner(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = r + std::abs(traj.times[k]);
    if (a >= traj.r.back()) {
      inner[k] = 0.0;
      est.truncated = true;
      continue;
    }
    require_clean(traj, k, a, "ynorm_estimate");
    inner[k] = std::sqrt(power_tail(traj, k, a, 10, est.truncated));
  }
  double tmax = 0.0;
  for (double t : traj.times) tmax = std::max(tmax, std::abs(t));
  auto integral = [&](double window) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      if (std::abs(traj.times[k]) > window + 1e-12 || std::abs(traj.times[k + 1]) > window + 1e-12) continue;
      s += 0.5 * (inner[k] + inner[k + 1]) * (traj.times[k + 1] - traj.times[k]);
    }
    return std::pow(s, 0.2);
  };
  est.value = integral(tmax);
  est.half_window = integral(0.5 * tmax);
  est.relative_change = est.value > 0 ? (est.value - est.half_window) / est.value : 0.0;
  return est;
}

TailMax l6_tail(const Trajectory& traj, double r) {
  if (traj.spec.nu != 0) throw std::invalid_argument("l6_tail: needs a radial (nu = 0) trajectory");
  TailMax out;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const double a = r + std::abs(traj.times[k]);
    if (a >= traj.r.back()) continue;
    require_clean(traj, k, a, "l6_tail");
    const double v = power_tail(traj, k, a, 6, out.truncated);
    if (v > out.value) {
      out.value = v;
      out.t_at_max = traj.times[k];
    }
  }
  return out;
}

DuhamelReport duhamel_check(const Trajectory& nl, const Trajectory& lin, double r_probe_max) {
  if (nl.spec.lifted_dimension() != 3) throw std::invalid_argument("duhamel_check: needs D = 3");
  if (nl.times != lin.times || nl.r != lin.r) throw std::invalid_argument("duhamel_check: runs must share grids");
  const double scale = nl.normalization == Normalization::physical ? 1.0 : 1.0 / std::sqrt(sphere_area(nl.spec.d));
  const std::size_t K = nl.times.size() - 1;
  const double T = nl.times[K];
  const double h = nl.dr();
  // rho F(u(rho, tau)) at every snapshot, in the stored field's units
  std::vector<std::vector<double>> g(K + 1, std::vector<double>(nl.r.size()));
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < nl.r.size(); ++i) g[k][i] = nl.r[i] * nl.nonlinearity.F(scale * nl.u[k][i]) / scale;
  auto interval = [&](std::size_t k, double a, double b) {
    // int_a^b g[k] drho with linear interpolation
    if (!(b > a)) return 0.0;
    auto interp = [&](double x) {
      std::size_t i = std::min(static_cast<std::size_t>(x / h), nl.r.size() - 2);
      const double th = (x - nl.r[i]) / h;
      return (1 - th) * g[k][i] + th * g[k][i + 1];
    };
    const std::size_t ia = static_cast<std::size_t>(std::floor(a / h)) + 1;
    const std::size_t ib = std::min(static_cast<std::size_t>(std::floor(b / h)), nl.r.size() - 1);
    if (ia > ib) return 0.5 * (interp(a) + interp(b)) * (b - a);
    double s = 0.5 * (interp(a) + g[k][ia]) * (nl.r[ia] - a);
    for (std::size_t i = ia; i < ib; ++i) s += 0.5 * (g[k][i] + g[k][i + 1]) * h;
    s += 0.5 * (g[k][ib] + interp(b)) * (b - nl.r[ib]);
    return s;
  };
  DuhamelReport rep;
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(0.1 / h));
  for (std::size_t i = stride; i < nl.r.size() && nl.r[i] <= r_probe_max; i += stride) {
    const double r = nl.r[i];
    if (r + T >= nl.r_clean[K]) break;
    double w = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double s0 = T - nl.times[k], s1 = T - nl.times[k + 1];
      const double f0 = interval(k, std::abs(r - s0), r + s0);
      const double f1 = interval(k + 1, std::abs(r - s1), r + s1);
      w += 0.5 * (f0 + f1) * (nl.times[k + 1] - nl.times[k]);
    }
    const double duhamel = 0.5 * w / r;
    const double diff = nl.u[K][i] - lin.u[K][i];
    rep.max_difference = std::max(rep.max_difference, std::abs(diff - duhamel));
    rep.max_nonlinear = std::max(rep.max_nonlinear, std::abs(diff));
    ++rep.points;
  }
  rep.relative = rep.max_nonlinear > 0 ? rep.max_difference / rep.max_nonlinear : 0.0;
  return rep;
}

}  // namespace nonrad
