#include "nonrad/sphere3.hpp"

#include "nonrad/polylib.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nonrad {

double sph_harm_eval(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l)
    throw std::invalid_argument("sph_harm_eval: need |m| <= l, got l=" + std::to_string(l) + " m=" + std::to_string(m));
  const unsigned ul = static_cast<unsigned>(l), um = static_cast<unsigned>(std::abs(m));
  const double y = std::sph_legendre(ul, um, theta);
  if (m == 0) return y;
  if (m > 0) return std::numbers::sqrt2 * y * std::cos(m * phi);
  return std::numbers::sqrt2 * y * std::sin(-m * phi);
}

SphereGrid::SphereGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("SphereGrid: node counts must be positive");
  const auto rule = gauss_nodes(n_theta);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double th = std::acos(rule.nodes[static_cast<std::size_t>(i)]);
    for (int j = 0; j < n_phi; ++j) {
      theta_.push_back(th);
      phi_.push_back(j * dphi);
      weight_.push_back(rule.weights[static_cast<std::size_t>(i)] * dphi);
    }
  }
}

int SphereGrid::exact_degree() const { return std::min(2 * n_theta_ - 1, n_phi_ - 1); }

ModeProjection analyze(const SphereField& field, int l, int m) {
  if (2 * l > field.grid.exact_degree())
    throw std::invalid_argument("analyze: grid integrates degree " + std::to_string(field.grid.exact_degree()) +
                                " exactly, mode l=" + std::to_string(l) + " needs " + std::to_string(2 * l));
  std::vector<double> y(field.grid.size());
  for (std::size_t j = 0; j < y.size(); ++j)
    y[j] = sph_harm_eval(l, m, field.grid.theta(j), field.grid.phi(j)) * field.grid.weight(j);
  ModeProjection out;
  for (std::size_t i = 0; i < field.r.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) s += field.values[i][j] * y[j];
    out.c.push_back(s);
    out.lifted.push_back(s * std::pow(field.r[i], -l));
  }
  return out;
}

SphereField synthesize(const std::map<ModeKey, std::vector<double>>& coefficients, const std::vector<double>& r,
                       const SphereGrid& grid) {
  SphereField out{r, grid, std::vector<std::vector<double>>(r.size(), std::vector<double>(grid.size(), 0.0))};
  for (const auto& [key, c] : coefficients) {
    if (c.size() != r.size()) throw std::invalid_argument("synthesize: coefficient length differs from radial grid");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double y = sph_harm_eval(key.first, key.second, grid.theta(j), grid.phi(j));
      for (std::size_t i = 0; i < r.size(); ++i) out.values[i][j] += c[i] * y;
    }
  }
  return out;
}

}  // namespace nonrad
