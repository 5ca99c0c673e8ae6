#pragma once

#include "landau/kinetic/grid.hpp"
#include "landau/quadrature.hpp"
#include "landau/sphere/grid.hpp"

namespace landau::lifted {

// Jacobian of (z, r, sigma) -> (z + r sigma, z - r sigma): dv dw = kappa r^2 dz dr dsigma.
inline constexpr double kappa = 8.0;

// Product rule for integrals over (z, r, sigma). z uses the midpoint rule per
// axis (spectrally accurate for the Gaussian-like profiles of f (x) f, where
// Gauss-Legendre on a wide box is not), r uses Gauss-Legendre on (0, r_max],
// which never places a node on the axis r = 0.
struct ZRQuadrature {
  std::vector<Vec3> z;
  std::vector<double> z_weights;
  std::vector<double> r;
  std::vector<double> r_weights;
  sphere::GridPtr sphere;

  ZRQuadrature(int z_nodes, double z_half_width, int r_nodes, double r_max, int bandlimit) {
    if (z_nodes < 2 || r_nodes < 1) throw ConfigError("quadrature needs at least 2 z nodes and 1 r node");
    if (!(z_half_width > 0.0) || !(r_max > 0.0)) throw ConfigError("quadrature extents must be positive");
    const double hz = 2.0 * z_half_width / z_nodes;
    std::vector<double> x(z_nodes);
    for (int i = 0; i < z_nodes; ++i) x[i] = -z_half_width + (i + 0.5) * hz;
    for (int i = 0; i < z_nodes; ++i)
      for (int j = 0; j < z_nodes; ++j)
        for (int k = 0; k < z_nodes; ++k) {
          z.emplace_back(x[i], x[j], x[k]);
          z_weights.push_back(hz * hz * hz);
        }
    const GaussRule gl = gauss_legendre(r_nodes, 0.0, r_max);
    r = gl.nodes;
    r_weights = gl.weights;
    sphere = sphere::build_grid(bandlimit);
  }

  // z box and r range both follow the velocity box.
  static ZRQuadrature for_grid(const kinetic::VelocityGrid& g, int z_nodes = 16, int r_nodes = 12, int bandlimit = 8) {
    return {z_nodes, g.half_width(), r_nodes, g.half_width(), bandlimit};
  }

  [[nodiscard]] std::size_t slice_count() const { return z.size() * r.size(); }

  // kappa r^2 w_z w_r w_sigma summed over every node.
  [[nodiscard]] double measure() const {
    double zs = 0.0, rs = 0.0, ss = 0.0;
    for (double w : z_weights) zs += w;
    for (std::size_t i = 0; i < r.size(); ++i) rs += r_weights[i] * r[i] * r[i];
    for (double w : sphere->weights()) ss += w;
    return kappa * zs * rs * ss;
  }
};

}  // namespace landau::lifted
