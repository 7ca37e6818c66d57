#include "nonrad/cli.hpp"

#include "nonrad/decay_lab.hpp"
#include "nonrad/exact_evolution.hpp"
#include "nonrad/exterior_basis.hpp"
#include "nonrad/polylib.hpp"
#include "nonrad/radial_solver.hpp"
#include "nonrad/radiation3.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>

#ifndef NONRAD_VERSION
#define NONRAD_VERSION "unknown"
#endif

namespace nonrad::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Parameter tables

enum class Kind { integer, number, boolean, string, number_array, string_array };

struct Param {
  std::string name;
  Kind kind;
  json def;
  std::string help;
  std::vector<std::string> choices = {};
  std::optional<double> minimum = {};
  bool exclusive = false;
};

struct Artifact {
  std::string name;
  std::string content;
};

struct Result {
  json results = json::object();
  std::vector<Artifact> artifacts;
  /// Nonempty on a numerical failure (exit 2).
  std::string failure;
};

struct Subcommand {
  std::string name;
  std::string description;
  std::vector<Param> params;
  std::function<Result(const json&)> handler;
};

std::string flag_name(const std::string& name) {
  std::string s = name;
  for (char& c : s)
    if (c == '_') c = '-';
  return s;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::integer: return "integer";
    case Kind::number: return "number";
    case Kind::boolean: return "boolean";
    case Kind::string: return "string";
    case Kind::number_array: return "array of numbers";
    case Kind::string_array: return "array of strings";
  }
  return "?";
}

std::vector<Param> common_params() {
  return {
      {"seed", Kind::integer, 0, "seed for randomized suites", {}, 0.0},
      {"output_dir", Kind::string, "", "artifact directory (default: $NONRAD_OUTPUT_DIR, else .)"},
  };
}

std::vector<Param> mode_params() {
  return {
      {"d", Kind::integer, 3, "spatial dimension", {}, 2.0},
      {"nu", Kind::integer, 0, "spherical harmonic degree", {}, 0.0},
      {"R", Kind::number, 1.0, "exterior radius", {}, 0.0, true},
      {"A", Kind::number_array, json::array({1.0}), "position coefficients A_1..A_K1"},
      {"B", Kind::number_array, json::array(), "velocity coefficients B_1..B_K2"},
  };
}

std::vector<Param> radial3_source_params(double A) {
  return {
      {"source", Kind::string, "mode", "initial data: exterior basis mode or Gaussian bump", {"mode", "bump"}},
      {"R", Kind::number, 1.0, "exterior radius of the mode data", {}, 0.0, true},
      {"A", Kind::number_array, json::array({A}), "coefficient of A/r outside R (d = 3 radial)"},
      {"blend_order", Kind::integer, 2, "derivatives matched at R by the interior extension", {}, 1.0},
      {"bump_amplitude", Kind::number, 1.0, "bump source: u0 = a exp(-(r/w)^2)"},
      {"bump_width", Kind::number, 1.0, "bump source: width w", {}, 0.0, true},
      {"bump_velocity", Kind::number, 0.0, "bump source: u1 = v exp(-(r/w)^2)"},
  };
}

std::vector<Param> grid_params(double r_max, int n_r, double t_final, int n_snapshots) {
  return {
      {"r_max", Kind::number, r_max, "outer radius of the grid", {}, 0.0, true},
      {"n_r", Kind::integer, n_r, "number of grid intervals", {}, 8.0},
      {"cfl", Kind::number, 0.9, "fraction of the stable time step", {}, 0.0, true},
      {"t_final", Kind::number, t_final, "final time", {}, 0.0, true},
      {"n_snapshots", Kind::integer, n_snapshots, "stored snapshots including t = 0", {}, 2.0},
  };
}

std::vector<Param> scheme_params() {
  return {
      {"scheme", Kind::string, "leapfrog", "time integrator", {"leapfrog", "rk4_mol"}},
      {"boundary", Kind::string, "dirichlet", "outer boundary", {"dirichlet", "neumann", "sommerfeld", "exact"}},
  };
}

Param normalization_param(const char* def) {
  return {"normalization", Kind::string, def, "mode coefficient or physical field", {"mode_coefficient", "physical"}};
}

template <class... V>
std::vector<Param> concat(V&&... parts) {
  std::vector<Param> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header) {
    bool first = true;
    for (const char* h : header) {
      if (!first) text_ += ',';
      text_ += h;
      first = false;
    }
    text_ += '\n';
  }
  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) text_ += ',';
      text_ += fmt17(v);
      first = false;
    }
    text_ += '\n';
  }
  Artifact artifact(std::string name) const { return {std::move(name), text_}; }

 private:
  std::string text_;
};

Artifact decay_table(const std::string& name, const std::vector<std::pair<double, double>>& samples) {
  Csv csv{"r", "value"};
  for (const auto& [r, v] : samples) csv.row({r, v});
  return csv.artifact(name);
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot open '" + tmp.string() + "' for writing (check output_dir)");
    f << content;
    f.flush();
    if (!f) throw ValidationError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ValidationError("cannot move output into '" + path.string() + "'");
  }
}

json report_json(const DecayReport& rep) {
  json samples = json::array();
  for (const auto& [r, v] : rep.samples) samples.push_back({{"r", r}, {"value", v}});
  return {{"samples", samples}, {"fitted", rep.fitted}, {"beta", rep.beta}, {"residual", rep.residual}};
}

// ---------------------------------------------------------------------------
// Config accessors

std::vector<double> numbers(const json& v) { return v.get<std::vector<double>>(); }

ExteriorModeData mode_data(const json& c) {
  ModeSpec spec{c["d"].get<int>(), c["nu"].get<int>()};
  return build_exterior_mode(spec, c["R"].get<double>(), numbers(c["A"]), numbers(c["B"]));
}

SolverConfig solver_config(const json& c) {
  SolverConfig cfg;
  cfg.r_max = c["r_max"].get<double>();
  cfg.n_r = c["n_r"].get<int>();
  cfg.cfl = c["cfl"].get<double>();
  cfg.t_final = c["t_final"].get<double>();
  cfg.n_snapshots = c["n_snapshots"].get<int>();
  if (c.contains("scheme")) cfg.scheme = scheme_from_string(c["scheme"].get<std::string>());
  if (c.contains("boundary")) cfg.boundary = boundary_from_string(c["boundary"].get<std::string>());
  return cfg;
}

// d = 3 radial data from a mode or a bump; ext is set for mode data.
RadialGridField radial3_field(const json& c, std::optional<ExteriorModeData>& ext) {
  const double r_max = c["r_max"].get<double>();
  const int n_r = c["n_r"].get<int>();
  const Normalization norm = normalization_from_string(c["normalization"].get<std::string>());
  if (c["source"] == "mode") {
    ext = build_exterior_mode({3, 0}, c["R"].get<double>(), numbers(c["A"]), {});
    return field_from_mode(*ext, r_max, n_r, c["blend_order"].get<int>(), norm);
  }
  const double a = c["bump_amplitude"].get<double>(), w = c["bump_width"].get<double>(),
               v = c["bump_velocity"].get<double>();
  return field_from_functions(
      {3, 0}, r_max, n_r, [=](double r) { return a * std::exp(-(r / w) * (r / w)); },
      [=](double r) { return v * std::exp(-(r / w) * (r / w)); }, norm);
}

Artifact trajectory_csv(const Trajectory& traj, int stride) {
  Csv csv{"t", "r", "u", "ut"};
  for (std::size_t k = 0; k < traj.times.size(); ++k)
    for (std::size_t i = 0; i < traj.r.size(); i += static_cast<std::size_t>(stride))
      csv.row({traj.times[k], traj.r[i], traj.u[k][i], traj.ut[k][i]});
  return csv.artifact("trajectory.csv");
}

json run_summary(const Trajectory& traj) {
  const double e0 = traj.energy.empty() ? 0.0 : traj.energy.front();
  const double e1 = traj.energy.empty() ? 0.0 : traj.energy.back();
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - e0));
  return {{"dt", traj.dt},
          {"steps", traj.steps},
          {"snapshots", traj.times.size()},
          {"energy_initial", e0},
          {"energy_final", e1},
          {"energy_drift_relative", e0 > 0.0 ? drift / e0 : drift},
          {"r_clean_final", traj.r_clean.empty() ? 0.0 : traj.r_clean.back()},
          {"blown_up", traj.blown_up},
          {"diagnostic", traj.diagnostic}};
}

// ---------------------------------------------------------------------------
// Handlers

Result run_basis(const json& c) {
  const ExteriorModeData data = mode_data(c);
  Result out;
  out.results["data"] = {{"d", data.spec.d}, {"nu", data.spec.nu}, {"R", data.R}, {"A", data.A}, {"B", data.B}};
  for (const auto& check : c["check"]) {
    if (check == "part2") {
      const auto n = series_norms(data);
      out.results["part2"] = {{"angular", n.angular}, {"u1_norm2", n.u1_norm2}, {"du0_norm2", n.du0_norm2}};
    } else if (check == "part3") {
      json rows = json::array();
      std::vector<std::pair<double, double>> table;
      bool monotone = true;
      double prev = INFINITY;
      for (double f : numbers(c["r1_factors"])) {
        const double R1 = f * data.R;
        const auto dc = decay_bound_check(data, R1);
        rows.push_back({{"R1", R1}, {"tail", dc.tail}, {"reference", dc.reference}, {"ratio", dc.ratio},
                        {"trivial", dc.trivial}});
        table.emplace_back(R1, dc.tail);
        monotone = monotone && dc.tail <= prev;
        prev = dc.tail;
      }
      out.results["part3"] = {{"checks", rows}, {"tail_nonincreasing", monotone}};
      out.artifacts.push_back(decay_table("basis_tail.csv", table));
    } else if (check == "span") {
      const auto span = radial_span(data.spec.d);
      out.results["span"] = {{"u0_exponents", span.u0_exponents}, {"u1_exponents", span.u1_exponents}};
    } else if (check == "profiles") {
      json rows = json::array();
      for (double r : numbers(c["profile_radii"])) {
        const auto p = eval_profiles(data, r);
        rows.push_back({{"r", r}, {"u0", p.u0}, {"u1", p.u1}, {"du0_dr", p.du0_dr}});
      }
      out.results["profiles"] = rows;
    }
  }
  return out;
}

json chains_json(const ExteriorModeData& data) {
  json chains = json::array();
  auto add = [&](ChainKind kind, const std::vector<double>& weights) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      const auto sol = chain_lift(data.spec, static_cast<int>(i) + 1, kind);
      json coeffs = json::array();
      for (const auto& q : sol.c) coeffs.push_back(q.get_str());
      chains.push_back({{"kind", to_string(kind)}, {"k", sol.k}, {"D", sol.D()}, {"data_coefficient", weights[i]},
                        {"c", coeffs}});
    }
  };
  add(ChainKind::position, data.A);
  add(ChainKind::velocity, data.B);
  return chains;
}

Result run_evolve(const json& c) {
  const ExteriorModeData data = mode_data(c);
  const Normalization norm = normalization_from_string(c["normalization"].get<std::string>());
  const auto field = field_from_mode(data, c["r_max"].get<double>(), c["n_r"].get<int>(), c["blend_order"].get<int>(), norm);
  SolverConfig cfg = solver_config(c);
  cfg.exterior = exterior_descriptor(data, norm);
  const Trajectory traj = solve(field, cfg);
  Result out;
  out.results["run"] = run_summary(traj);
  const int stride = c["csv_stride"].get<int>();
  out.artifacts.push_back(trajectory_csv(traj, stride));
  if (c["exact"].get<bool>()) {
    const ExactField& exact = cfg.exterior->field;
    Csv csv{"t", "r", "u", "ut"};
    double err = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      const double t = traj.times[k];
      for (std::size_t i = 0; i < traj.r.size(); ++i) {
        const double r = traj.r[i];
        if (r <= data.R + std::abs(t)) continue;
        const auto p = exact.eval(r, t);
        if (r <= traj.r_clean[k]) err = std::max(err, std::abs(traj.u[k][i] - p.u));
        if (i % static_cast<std::size_t>(stride) == 0) csv.row({t, r, p.u, p.ut});
      }
    }
    out.artifacts.push_back(csv.artifact("exact.csv"));
    const json chains = chains_json(data);
    out.results["chains"] = chains;
    out.results["max_error_exterior"] = err;
    out.artifacts.push_back({"chains.json", chains.dump(2) + "\n"});
  }
  if (traj.blown_up) out.failure = traj.diagnostic;
  return out;
}

json limit_json(const ConeLimit& lim, double floor) {
  return {{"limit", lim.limit},
          {"cauchy", lim.cauchy},
          {"relative", lim.cauchy / std::max(std::abs(lim.limit), floor)},
          {"t_half", lim.t_half},
          {"t_end", lim.t_end},
          {"e_half", lim.e_half},
          {"e_end", lim.e_end},
          {"truncated", lim.truncated}};
}

Result run_energy(const json& c) {
  const ExteriorModeData data = mode_data(c);
  const Normalization norm = normalization_from_string(c["normalization"].get<std::string>());
  const auto field = field_from_mode(data, c["r_max"].get<double>(), c["n_r"].get<int>(), c["blend_order"].get<int>(), norm);
  SolverConfig cfg = solver_config(c);
  cfg.exterior = exterior_descriptor(data, norm);
  const bool two_sided = c["two_sided"].get<bool>();
  const double cone_R = c["cone_R"].get<double>();
  const double tol = c["tolerance"].get<double>();
  const Trajectory traj = two_sided ? merge_two_sided(solve_backward(field, cfg), solve(field, cfg)) : solve(field, cfg);
  const auto samples = cone_energy(traj, cone_R);
  Csv csv{"t", "E_ext"};
  bool truncated = false;
  for (const auto& s : samples) {
    csv.row({s.t, s.energy});
    truncated = truncated || s.truncated;
  }
  Result out;
  const double energy = field_energy(field);
  // limits that vanish exactly (basis data) are judged against the data energy
  const double floor = c["floor_fraction"].get<double>() * energy;
  if (cone_R >= data.R) {
    const ExactField& exact = cfg.exterior->field;
    double dev = 0.0;
    for (const auto& s : samples)
      dev = std::max(dev, std::abs(s.energy - traj.measure_factor() * exact.energy_beyond(cone_R + std::abs(s.t), s.t)));
    out.results["max_deviation_from_exact"] = dev;
  }
  out.results["energy"] = energy;
  out.results["cone_R"] = cone_R;
  out.results["truncated"] = truncated;
  out.artifacts.push_back(csv.artifact("energy.csv"));
  std::vector<std::pair<int, const char*>> sides{{1, "plus"}};
  if (two_sided) sides.emplace_back(-1, "minus");
  for (const auto& [sign, name] : sides) {
    const auto lim = cone_energy_limit(traj, cone_R, sign);
    const json j = limit_json(lim, floor);
    out.results[std::string("limit_") + name] = j;
    if (j["relative"].get<double>() > tol && out.failure.empty())
      out.failure = std::string("exterior energy did not stabilize as t -> ") + (sign > 0 ? "+" : "-") +
                    "inf: relative Cauchy change " + fmt17(j["relative"].get<double>()) + " exceeds tolerance " +
                    fmt17(tol) + " (increase t_final)";
  }
  return out;
}

Result run_radiation(const json& c) {
  std::optional<ExteriorModeData> ext;
  const auto field = radial3_field(c, ext);
  const ExteriorModeData* ep = ext ? &*ext : nullptr;
  const RadiationProfile minus = forward_radiation(field, ep);
  RadiationProfile G = minus;
  if (c["side"] == "plus") {
    // G_+(s) = -G_-(-s)
    G.side = RadiationSide::plus;
    for (std::size_t i = 0; i < G.s.size(); ++i) {
      G.s[i] = -minus.s[minus.s.size() - 1 - i];
      G.g[i] = -minus.g[minus.g.size() - 1 - i];
    }
  }
  Result out;
  Csv csv{"s", "g"};
  for (std::size_t i = 0; i < G.s.size(); ++i) csv.row({G.s[i], G.g[i]});
  out.artifacts.push_back(csv.artifact("radiation.csv"));
  const auto iso = isometry(field, ep);
  out.results["isometry"] = {{"energy", iso.energy}, {"twice_norm2", iso.twice_norm2}, {"relative", iso.relative}};
  out.results["normalization_constant"] = kRadiationNormalization;
  std::vector<std::pair<double, double>> tails;
  bool monotone = true;
  for (double r : numbers(c["probe_radii"])) {
    tails.emplace_back(r, tail_S(G, r));
    if (tails.size() > 1 && tails.back().second > tails[tails.size() - 2].second) monotone = false;
  }
  out.results["tail_S"] = report_json(make_report(tails));
  out.results["tail_S_nonincreasing"] = monotone;
  out.artifacts.push_back(decay_table("decay_S.csv", tails));
  if (c["channel"].get<bool>()) {
    ChannelConfig cc;
    cc.t_final = c["t_final"].get<double>();
    cc.cfl = c["cfl"].get<double>();
    cc.n_snapshots = c["n_snapshots"].get<int>();
    cc.tolerance = c["tolerance"].get<double>();
    cc.floor_fraction = c["floor_fraction"].get<double>();
    const auto ch = channel_identity(field, c["channel_R"].get<double>(), cc, ep);
    out.results["channel"] = {{"lhs", ch.lhs},           {"rhs", ch.rhs},         {"limit_plus", ch.limit_plus},
                              {"limit_minus", ch.limit_minus}, {"cauchy", ch.cauchy}, {"stabilized", ch.stabilized},
                              {"truncated", ch.truncated}, {"energy", ch.energy},   {"relative", ch.relative}};
    if (!ch.stabilized)
      out.failure = "exterior energy limits did not stabilize within tolerance " + fmt17(cc.tolerance) +
                    " (Cauchy " + fmt17(ch.cauchy) + "); increase t_final and r_max";
  }
  return out;
}

Result run_nlw(const json& c) {
  std::optional<ExteriorModeData> ext;
  const auto field = radial3_field(c, ext);
  SolverConfig cfg = solver_config(c);
  cfg.nonlinearity = nonlinearity_from_string(c["nonlinearity"].get<std::string>());
  cfg.blowup_threshold = c["blowup_threshold"].get<double>();
  if (ext && cfg.nonlinearity.linear()) cfg.exterior = exterior_descriptor(*ext, field.normalization);
  Result out;
  const Trajectory fwd = solve(field, cfg);
  std::optional<Trajectory> bwd;
  if (c["two_sided"].get<bool>()) bwd = solve_backward(field, cfg);
  if (fwd.blown_up || (bwd && bwd->blown_up)) {
    const Trajectory& bad = fwd.blown_up ? fwd : *bwd;
    out.results["run"] = run_summary(bad);
    out.failure = bad.diagnostic.empty() ? std::string("blow-up") : bad.diagnostic;
    out.artifacts.push_back(trajectory_csv(bad, c["csv_stride"].get<int>()));
    return out;
  }
  const Trajectory traj = bwd ? merge_two_sided(*bwd, fwd) : fwd;
  out.results["run"] = run_summary(traj);
  out.results["nonlinearity"] = cfg.nonlinearity.name();
  out.artifacts.push_back(trajectory_csv(traj, c["csv_stride"].get<int>()));
  Csv csv{"t", "E"};
  for (std::size_t k = 0; k < traj.times.size(); ++k) csv.row({traj.times[k], traj.energy[k]});
  out.artifacts.push_back(csv.artifact("conserved_energy.csv"));
  return out;
}

Rational parse_rational(const json& v, const char* key) {
  try {
    Rational q(v.get<std::string>());
    q.canonicalize();
    return q;
  } catch (const std::invalid_argument&) {
    throw ValidationError(std::string(key) + ": '" + v.get<std::string>() + "' is not a rational number like 1/3");
  }
}

Result run_lemmas(const json& c) {
  std::vector<LemmaVariant> variants;
  if (c["variant"] == "all")
    variants = {LemmaVariant::sup_odd, LemmaVariant::deriv_odd, LemmaVariant::sup_even, LemmaVariant::deriv_even};
  else
    variants = {lemma_variant_from_string(c["variant"].get<std::string>())};
  const Rational L = parse_rational(c["L"], "L"), l = parse_rational(c["l"], "l");
  const int degree_max = c["degree_max"].get<int>(), trials = c["trials"].get<int>();
  const int nmax = c["numerator_max"].get<int>(), dmax = c["denominator_max"].get<int>();
  std::mt19937_64 rng(c["seed"].get<std::uint64_t>());
  std::uniform_int_distribution<int> deg(0, degree_max), num(-nmax, nmax), den(1, dmax);
  struct Tally {
    long checks = 0, violations = 0, inexact = 0;
    double max_ratio = 0.0;
  };
  std::vector<Tally> tally(variants.size());
  for (int trial = 0; trial < trials; ++trial) {
    std::vector<Rational> cs;
    const int n = deg(rng);
    for (int i = 0; i <= n; ++i) {
      const int p = num(rng), q = den(rng);
      cs.push_back(make_rational(p, q));
    }
    const RationalPoly poly(std::move(cs));
    for (std::size_t v = 0; v < variants.size(); ++v) {
      const auto r = lemma_check(poly, variants[v], L, l);
      auto& t = tally[v];
      ++t.checks;
      if (!r.holds) ++t.violations;
      if (!r.exact_max) ++t.inexact;
      if (r.rhs > 0) t.max_ratio = std::max(t.max_ratio, Rational(r.lhs / r.rhs).get_d());
    }
  }
  Result out;
  long total = 0;
  json per = json::object();
  for (std::size_t v = 0; v < variants.size(); ++v) {
    total += tally[v].violations;
    per[to_string(variants[v])] = {{"checks", tally[v].checks},
                                   {"violations", tally[v].violations},
                                   {"inexact_max", tally[v].inexact},
                                   {"max_ratio", tally[v].max_ratio}};
  }
  out.results["violations"] = total;
  out.results["variants"] = per;
  if (total > 0) out.failure = "lemma inequality violated in " + std::to_string(total) + " checks";
  return out;
}

Result run_pipeline(const json& c) {
  std::optional<ExteriorModeData> ext;
  const auto field = radial3_field(c, ext);
  PipelineConfig pc;
  pc.R = c["R"].get<double>();
  pc.probe_start = c["probe_start"].get<double>();
  pc.probe_ratio = c["probe_ratio"].get<double>();
  pc.probe_count = c["probe_count"].get<int>();
  pc.nonlinearity = nonlinearity_from_string(c["nonlinearity"].get<std::string>());
  pc.t_final = c["t_final"].get<double>();
  pc.n_snapshots = c["n_snapshots"].get<int>();
  pc.cfl = c["cfl"].get<double>();
  const auto rep = nonlinear_decay_pipeline(field, pc, ext ? &*ext : nullptr);
  Result out;
  out.results["radii"] = rep.radii;
  out.results["exploratory"] = rep.exploratory;
  out.results["S"] = report_json(rep.S_report);
  out.results["S_nonincreasing"] = rep.S_nonincreasing;
  out.results["dr_u0_tail"] = report_json(rep.dr_u0_report);
  out.results["l6_tail"] = report_json(rep.l6_report);
  out.results["l6_truncated"] = rep.l6_truncated;
  out.results["blown_up"] = rep.blown_up;
  out.results["diagnostic"] = rep.diagnostic;
  out.artifacts.push_back(decay_table("decay_S.csv", rep.S_report.samples));
  out.artifacts.push_back(decay_table("decay_dr_u0.csv", rep.dr_u0_report.samples));
  out.artifacts.push_back(decay_table("decay_l6.csv", rep.l6_report.samples));
  if (rep.blown_up) {
    out.failure = rep.diagnostic;
    return out;
  }
  if (c["worst_case"].get<bool>()) {
    RecursionParams p{c["alpha"].get<double>(), c["l"].get<double>(), c["gamma0"].get<double>()};
    const auto gamma = gamma_sequence(p, c["gamma_iterations"].get<int>());
    Csv gcsv{"k", "gamma"};
    for (std::size_t k = 0; k < gamma.size(); ++k) gcsv.row({static_cast<double>(k), gamma[k]});
    out.artifacts.push_back(gcsv.artifact("gamma.csv"));
    WorstCaseOptions opt;
    opt.seed = c["worst_seed"].get<double>();
    opt.r1_factor = c["r1_factor"].get<double>();
    opt.r2_factor = c["r2_factor"].get<double>();
    opt.fit_span = c["fit_span"].get<double>();
    const auto wc = worst_case_S(p, pc.R, pc.R * c["worst_r_max_ratio"].get<double>(), c["grid_ratio"].get<double>(), opt);
    Csv wcsv{"r", "value"};
    for (std::size_t i = 0; i < wc.r.size(); ++i) wcsv.row({wc.r[i], wc.S[i]});
    out.artifacts.push_back(wcsv.artifact("worst_case_S.csv"));
    out.results["recursion"] = {{"fixed_point", p.fixed_point()},
                                {"gamma_final", gamma.back()},
                                {"gamma_error", std::abs(gamma.back() - p.fixed_point())},
                                {"worst_case_beta", wc.report.beta},
                                {"worst_case_residual", wc.report.residual},
                                {"worst_case_deviation", wc.report.beta - p.fixed_point()},
                                {"coarse", wc.coarse},
                                {"thresholds", {{"r1_factor", opt.r1_factor}, {"r2_factor", opt.r2_factor}}}};
  }
  return out;
}

std::vector<Subcommand> table() {
  std::vector<Subcommand> subs;
  subs.push_back({"basis", "exterior basis identities for one spherical harmonic mode",
                  concat(mode_params(),
                         std::vector<Param>{
                             {"check", Kind::string_array, json::array({"part2", "part3"}), "checks to run",
                              {"part2", "part3", "span", "profiles"}},
                             {"r1_factors", Kind::number_array, json::array({2.0, 4.0, 8.0}),
                              "decay check radii R1 = factor * R (factor >= 2)"},
                             {"profile_radii", Kind::number_array, json::array({2.0}), "radii r > R for profile values"},
                         },
                         common_params()),
                  run_basis});
  subs.push_back({"evolve", "linear evolution of exterior mode data",
                  concat(mode_params(), grid_params(40.0, 4000, 10.0, 11), scheme_params(),
                         std::vector<Param>{
                             normalization_param("mode_coefficient"),
                             {"blend_order", Kind::integer, 1, "derivatives matched at R by the interior extension", {}, 1.0},
                             {"exact", Kind::boolean, false, "also emit the closed-form exterior solution"},
                             {"csv_stride", Kind::integer, 10, "write every n-th grid point", {}, 1.0},
                         },
                         common_params()),
                  run_evolve});
  subs.push_back({"energy", "exterior-cone energy series and its limits",
                  concat(mode_params(), grid_params(60.0, 6000, 20.0, 41), scheme_params(),
                         std::vector<Param>{
                             normalization_param("mode_coefficient"),
                             {"blend_order", Kind::integer, 1, "derivatives matched at R by the interior extension", {}, 1.0},
                             {"cone_R", Kind::number, 1.0, "cone offset: energy outside |x| > cone_R + |t|", {}, 0.0},
                             {"two_sided", Kind::boolean, true, "also run backward in time"},
                             {"tolerance", Kind::number, 1e-2, "relative Cauchy tolerance of the limits", {}, 0.0, true},
                             {"floor_fraction", Kind::number, 1e-2,
                              "limits below this fraction of the data energy are judged against it", {}, 0.0, true},
                         },
                         common_params()),
                  run_energy});
  subs.push_back({"radiation", "radiation field of d = 3 radial data",
                  concat(radial3_source_params(1.0), grid_params(80.0, 8000, 24.0, 49),
                         std::vector<Param>{
                             normalization_param("physical"),
                             {"side", Kind::string, "minus", "radiation field written to radiation.csv", {"minus", "plus"}},
                             {"probe_radii", Kind::number_array, json::array({2.0, 4.0, 8.0, 16.0}), "radii for S(r)"},
                             {"channel", Kind::boolean, false, "check the exterior energy identity by two solver runs"},
                             {"channel_R", Kind::number, 1.0, "cone offset of the energy identity", {}, 0.0},
                             {"tolerance", Kind::number, 1e-2, "relative Cauchy tolerance of the limits", {}, 0.0, true},
                             {"floor_fraction", Kind::number, 1e-2,
                              "limits below this fraction of the data energy are judged against it", {}, 0.0, true},
                         },
                         common_params()),
                  run_radiation});
  subs.push_back({"nlw", "radial d = 3 wave equation with optional quintic term",
                  concat(radial3_source_params(1.0), grid_params(40.0, 4000, 10.0, 21), scheme_params(),
                         std::vector<Param>{
                             normalization_param("physical"),
                             {"nonlinearity", Kind::string, "defocusing_quintic", "power nonlinearity",
                              {"none", "defocusing_quintic", "focusing_quintic"}},
                             {"blowup_threshold", Kind::number, 1e6, "max |u| before the run is declared blown up", {}, 0.0, true},
                             {"two_sided", Kind::boolean, false, "also run backward in time"},
                             {"csv_stride", Kind::integer, 10, "write every n-th grid point", {}, 1.0},
                         },
                         common_params()),
                  run_nlw});
  subs.push_back({"lemmas", "randomized exact checks of the polynomial inequalities",
                  concat(std::vector<Param>{
                             {"variant", Kind::string, "all", "inequality to check",
                              {"all", "sup_odd", "deriv_odd", "sup_even", "deriv_even"}},
                             {"degree_max", Kind::integer, 15, "largest polynomial degree", {}, 0.0},
                             {"trials", Kind::integer, 1000, "random polynomials", {}, 1.0},
                             {"L", Kind::string, "2", "interval length (rational)"},
                             {"l", Kind::string, "1/3", "derivative window, L >= 2 l (rational)"},
                             {"numerator_max", Kind::integer, 50, "coefficients p/q with |p| <= numerator_max", {}, 0.0},
                             {"denominator_max", Kind::integer, 16, "and 1 <= q <= denominator_max", {}, 1.0},
                         },
                         common_params()),
                  run_lemmas});
  subs.push_back({"pipeline", "exterior decay pipeline and the recursion bound",
                  concat(radial3_source_params(0.6),
                         std::vector<Param>{
                             {"r_max", Kind::number, 200.0, "outer radius of the grid", {}, 0.0, true},
                             {"n_r", Kind::integer, 20000, "number of grid intervals", {}, 8.0},
                             {"cfl", Kind::number, 0.9, "fraction of the stable time step", {}, 0.0, true},
                             {"t_final", Kind::number, 8.0, "final time of each nonlinear run", {}, 0.0, true},
                             {"n_snapshots", Kind::integer, 81, "stored snapshots per direction", {}, 2.0},
                             normalization_param("mode_coefficient"),
                             {"probe_start", Kind::number, 2.0, "first probe radius in units of R", {}, 0.0, true},
                             {"probe_ratio", Kind::number, 2.0, "ratio of successive probe radii", {}, 1.0, true},
                             {"probe_count", Kind::integer, 5, "number of probe radii", {}, 4.0},
                             {"nonlinearity", Kind::string, "defocusing_quintic", "power nonlinearity",
                              {"none", "defocusing_quintic", "focusing_quintic"}},
                             {"worst_case", Kind::boolean, true, "also evaluate the recursion bound"},
                             {"alpha", Kind::number, 1.0, "recursion exponent alpha", {}, 0.0, true},
                             {"l", Kind::number, 5.0, "recursion power l > 1", {}, 1.0, true},
                             {"gamma0", Kind::number, 0.1, "initial exponent", {}, 0.0, true},
                             {"gamma_iterations", Kind::integer, 200, "ladder length", {}, 0.0},
                             {"worst_r_max_ratio", Kind::number, 1e6, "worst-case grid extent r_max / R", {}, 1.0, true},
                             {"grid_ratio", Kind::number, 1.02, "geometric grid ratio", {}, 1.0, true},
                             {"worst_seed", Kind::number, 0.49, "S on the initial band", {}, 0.0},
                             {"r1_factor", Kind::number, 4.0, "admissible r1 >= r1_factor R", {}, 1.0},
                             {"r2_factor", Kind::number, 4.0, "admissible r2 >= r2_factor r1", {}, 1.0, true},
                             {"fit_span", Kind::number, 10.0, "fit over r in [r_max / fit_span, r_max]", {}, 1.0, true},
                         },
                         common_params()),
                  run_pipeline});
  return subs;
}

// ---------------------------------------------------------------------------
// Typed conversion and checks

json from_text(const Param& p, const std::string& text) {
  const std::string where = "--" + flag_name(p.name);
  auto number = [&](const std::string& s) {
    std::size_t pos = 0;
    double v;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ValidationError(where + ": expected a number, got '" + s + "'");
    }
    if (pos != s.size()) throw ValidationError(where + ": expected a number, got '" + s + "'");
    return v;
  };
  switch (p.kind) {
    case Kind::integer: {
      std::size_t pos = 0;
      long long v;
      try {
        v = std::stoll(text, &pos);
      } catch (const std::exception&) {
        throw ValidationError(where + ": expected an integer, got '" + text + "'");
      }
      if (pos != text.size()) throw ValidationError(where + ": expected an integer, got '" + text + "'");
      return v;
    }
    case Kind::number: return number(text);
    case Kind::string: return text;
    default: throw std::logic_error("from_text: scalar kinds only");
  }
}

void check_value(const Param& p, const json& v, const std::string& where) {
  auto fail = [&](const std::string& what) { throw ValidationError(where + ": " + what); };
  auto check_number = [&](const json& x) {
    if (!x.is_number()) fail(std::string("expected ") + kind_name(p.kind));
    const double d = x.get<double>();
    if (!std::isfinite(d)) fail("must be finite");
    if (p.minimum) {
      if (p.exclusive && !(d > *p.minimum)) fail("must be greater than " + fmt17(*p.minimum) + " (got " + fmt17(d) + ")");
      if (!p.exclusive && !(d >= *p.minimum)) fail("must be at least " + fmt17(*p.minimum) + " (got " + fmt17(d) + ")");
    }
  };
  auto check_choice = [&](const json& x) {
    if (!x.is_string()) fail(std::string("expected ") + kind_name(p.kind));
    if (p.choices.empty()) return;
    const auto s = x.get<std::string>();
    for (const auto& c : p.choices)
      if (c == s) return;
    std::string list;
    for (const auto& c : p.choices) list += (list.empty() ? "" : ", ") + c;
    fail("'" + s + "' is not one of: " + list);
  };
  switch (p.kind) {
    case Kind::integer:
      if (!v.is_number_integer()) fail("expected an integer");
      check_number(v);
      break;
    case Kind::number: check_number(v); break;
    case Kind::boolean:
      if (!v.is_boolean()) fail("expected true or false");
      break;
    case Kind::string: check_choice(v); break;
    case Kind::number_array:
      if (!v.is_array()) fail("expected an array of numbers");
      for (const auto& x : v) check_number(x);
      break;
    case Kind::string_array:
      if (!v.is_array()) fail("expected an array of strings");
      for (const auto& x : v) check_choice(x);
      break;
  }
}

json load_config_file(const std::string& path, const Subcommand& sub) {
  if (!fs::exists(path)) throw ValidationError("config file '" + path + "' does not exist");
  std::ifstream f(path);
  if (!f) throw ValidationError("config file '" + path + "' cannot be read");
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config file '" + path + "' must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const Param* p = nullptr;
    for (const auto& q : sub.params)
      if (q.name == key) p = &q;
    if (!p) {
      std::string allowed;
      for (const auto& q : sub.params) allowed += (allowed.empty() ? "" : ", ") + q.name;
      throw ValidationError("config file '" + path + "': unknown key '" + key + "' for " + sub.name +
                            " (allowed: " + allowed + ")");
    }
    check_value(*p, value, "config file '" + path + "': key '" + key + "'");
  }
  return doc;
}

json param_schema(const Param& p) {
  json s;
  auto scalar_type = [](Kind k) -> const char* {
    switch (k) {
      case Kind::integer: return "integer";
      case Kind::number:
      case Kind::number_array: return "number";
      case Kind::boolean: return "boolean";
      default: return "string";
    }
  };
  const bool array = p.kind == Kind::number_array || p.kind == Kind::string_array;
  json item = {{"type", scalar_type(p.kind)}};
  if (!p.choices.empty()) item["enum"] = p.choices;
  if (p.minimum) item[p.exclusive ? "exclusiveMinimum" : "minimum"] = *p.minimum;
  if (array) {
    s["type"] = "array";
    s["items"] = item;
  } else {
    s = item;
  }
  s["description"] = p.help;
  s["default"] = p.def;
  return s;
}

json config_schema(const Subcommand& sub) {
  json props = json::object();
  for (const auto& p : sub.params) props[p.name] = param_schema(p);
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"$id", "nonrad/" + sub.name + ".config.schema.json"},
          {"title", "nonrad " + sub.name + " config"},
          {"description", sub.description},
          {"type", "object"},
          {"additionalProperties", false},
          {"properties", props}};
}

json report_schema() {
  json names = json::array();
  for (const auto& s : table()) names.push_back(s.name);
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"$id", "nonrad/report.schema.json"},
          {"title", "nonrad report"},
          {"type", "object"},
          {"additionalProperties", false},
          {"required", {"version", "subcommand", "status"}},
          {"properties",
           {{"version", {{"type", "string"}, {"description", "git-describe style build version"}}},
            {"subcommand", {{"type", "string"}, {"enum", names}}},
            {"status", {{"type", "string"}, {"enum", {"ok", "numerical_failure", "validation_error"}}}},
            {"config", {{"type", "object"}, {"description", "effective config after defaults, file and flags"}}},
            {"results", {{"type", "object"}, {"description", "subcommand-specific results"}}},
            {"artifacts",
             {{"type", "array"}, {"items", {{"type", "string"}}}, {"description", "files written next to the report"}}},
            {"diagnostic", {{"type", "string"}, {"description", "reason for a numerical failure"}}},
            {"error", {{"type", "string"}, {"description", "violated invariant for a validation error"}}}}}};
}

fs::path output_dir(const json& config) {
  std::string dir = config["output_dir"].get<std::string>();
  if (dir.empty()) {
    const char* env = std::getenv("NONRAD_OUTPUT_DIR");
    dir = env && *env ? env : ".";
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir + "': " + ec.message());
  return dir;
}

json error_json(const std::string& sub, const std::string& message) {
  return {{"version", NONRAD_VERSION}, {"subcommand", sub}, {"status", "validation_error"}, {"error", message}};
}

}  // namespace

std::vector<std::string> subcommands() {
  std::vector<std::string> names;
  for (const auto& s : table()) names.push_back(s.name);
  return names;
}

std::string schema_text(const std::string& name) {
  if (name == "report") return report_schema().dump(2) + "\n";
  for (const auto& s : table())
    if (s.name == name) return config_schema(s).dump(2) + "\n";
  throw std::invalid_argument("no schema named '" + name + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::vector<Subcommand> subs = table();
  CLI::App app{"Exterior energy and radiation experiments for radial and single-mode waves", "nonrad"};
  app.set_version_flag("--version", std::string(NONRAD_VERSION));
  app.require_subcommand(1);

  // CLI storage; std::map keeps references stable.
  std::map<std::string, std::string> config_path;
  std::map<std::string, std::string> scalars;
  std::map<std::string, std::vector<std::string>> arrays;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, CLI::App*> apps;

  for (const auto& sub : subs) {
    CLI::App* s = app.add_subcommand(sub.name, sub.description);
    apps[sub.name] = s;
    s->add_option("--config", config_path[sub.name], "JSON config; flags override its values");
    for (const auto& p : sub.params) {
      const std::string key = sub.name + "." + p.name;
      const std::string f = "--" + flag_name(p.name);
      const std::string names = p.name.find('_') != std::string::npos ? f + ",--" + p.name : f;
      CLI::Option* o = nullptr;
      switch (p.kind) {
        case Kind::boolean:
          o = s->add_flag(names + ",!--no-" + flag_name(p.name), flags[key], p.help);
          break;
        case Kind::number_array:
        case Kind::string_array:
          o = s->add_option(names, arrays[key], p.help)->expected(0, CLI::detail::expected_max_vector_size);
          break;
        default: o = s->add_option(names, scalars[key], p.help);
      }
      o->default_str(p.def.dump());
      options[key] = o;
    }
  }
  std::string schema_name;
  CLI::App* schema_app = app.add_subcommand("schema", "print a JSON schema")->group("");
  schema_app->add_option("--name", schema_name, "subcommand name or 'report'")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  std::string subname;
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& s : subs)
      if (apps[s.name]->parsed()) subname = s.name;
    out << error_json(subname, e.what()).dump(2) << "\n";
    return kValidationError;
  }

  if (schema_app->parsed()) {
    try {
      out << schema_text(schema_name);
      return kOk;
    } catch (const std::invalid_argument& e) {
      err << "error: " << e.what() << "\n";
      return kValidationError;
    }
  }

  const Subcommand* sub = nullptr;
  for (const auto& s : subs)
    if (apps[s.name]->parsed()) sub = &s;
  if (!sub) return kValidationError;

  json config = json::object();
  Result result;
  try {
    for (const auto& p : sub->params) config[p.name] = p.def;
    if (!config_path[sub->name].empty()) {
      const json file = load_config_file(config_path[sub->name], *sub);
      for (const auto& [k, v] : file.items()) config[k] = v;
    }
    for (const auto& p : sub->params) {
      const std::string key = sub->name + "." + p.name;
      if (options[key]->count() == 0) continue;
      switch (p.kind) {
        case Kind::boolean: config[p.name] = flags[key]; break;
        case Kind::number_array: {
          json a = json::array();
          for (const auto& t : arrays[key]) a.push_back(from_text({p.name, Kind::number, 0.0, ""}, t));
          config[p.name] = a;
          break;
        }
        case Kind::string_array: config[p.name] = arrays[key]; break;
        default: config[p.name] = from_text(p, scalars[key]);
      }
      check_value(p, config[p.name], "--" + flag_name(p.name));
    }
    const fs::path dir = output_dir(config);
    result = sub->handler(config);
    json report = {{"version", NONRAD_VERSION},
                   {"subcommand", sub->name},
                   {"status", result.failure.empty() ? "ok" : "numerical_failure"},
                   {"config", config},
                   {"results", result.results}};
    json names = json::array();
    for (const auto& a : result.artifacts) {
      write_atomic(dir / a.name, a.content);
      names.push_back(a.name);
    }
    report["artifacts"] = names;
    if (!result.failure.empty()) report["diagnostic"] = result.failure;
    const std::string text = report.dump(2) + "\n";
    write_atomic(dir / (sub->name + "_report.json"), text);
    out << text;
    if (!result.failure.empty()) {
      err << "numerical failure: " << result.failure << "\n";
      return kNumericalFailure;
    }
    return kOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    out << error_json(sub->name, e.what()).dump(2) << "\n";
    return kValidationError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    out << error_json(sub->name, e.what()).dump(2) << "\n";
    return kValidationError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    out << error_json(sub->name, e.what()).dump(2) << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    const json report = {{"version", NONRAD_VERSION},
                         {"subcommand", sub->name},
                         {"status", "numerical_failure"},
                         {"config", config},
                         {"diagnostic", e.what()}};
    err << "numerical failure: " << e.what() << "\n";
    out << report.dump(2) << "\n";
    return kNumericalFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace nonrad::cli
