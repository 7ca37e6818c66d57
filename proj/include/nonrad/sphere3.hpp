#pragma once

// Real spherical harmonics on S^2, a product quadrature rule, and the
// projection of sampled fields onto single modes.

#include <map>
#include <utility>
#include <vector>

namespace nonrad {

/// Real orthonormal harmonic: sqrt(2) N P_l^m cos(m phi) for m > 0,
/// sqrt(2) N P_l^|m| sin(|m| phi) for m < 0, N P_l^0 for m = 0.
double sph_harm_eval(int l, int m, double theta, double phi);

/// Gauss-Legendre in cos(theta) times a uniform azimuthal rule.
class SphereGrid {
 public:
  SphereGrid(int n_theta, int n_phi);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  std::size_t size() const { return theta_.size(); }
  double theta(std::size_t i) const { return theta_[i]; }
  double phi(std::size_t i) const { return phi_[i]; }
  double weight(std::size_t i) const { return weight_[i]; }
  /// Highest spherical-polynomial degree integrated exactly.
  int exact_degree() const;

 private:
  int n_theta_;
  int n_phi_;
  std::vector<double> theta_, phi_, weight_;
};

/// Samples u(r_i, node_j) on a radial grid times a sphere grid.
struct SphereField {
  std::vector<double> r;
  SphereGrid grid;
  std::vector<std::vector<double>> values;  // [radial index][node index]
};

struct ModeProjection {
  std::vector<double> c;       // int u(r theta) Y_lm(theta) dtheta
  std::vector<double> lifted;  // r^{-l} c(r)
};

/// Rejects (l, m) when products Y_lm Y_lm are not integrated exactly.
ModeProjection analyze(const SphereField& field, int l, int m);

using ModeKey = std::pair<int, int>;

/// Assembles sum_{(l,m)} c_lm(r) Y_lm on the grid.
SphereField synthesize(const std::map<ModeKey, std::vector<double>>& coefficients, const std::vector<double>& r,
                       const SphereGrid& grid);

/// Samples an arbitrary function f(r, theta, phi).
template <typename F>
SphereField sample(F&& f, const std::vector<double>& r, const SphereGrid& grid) {
  SphereField out{r, grid, std::vector<std::vector<double>>(r.size(), std::vector<double>(grid.size()))};
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) out.values[i][j] = f(r[i], grid.theta(j), grid.phi(j));
  return out;
}

}  // namespace nonrad
