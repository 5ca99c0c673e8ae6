#pragma once

#include "landau/kinetic/coefficients.hpp"

namespace landau::kinetic {

namespace detail {

inline void require_same_grid(const Density& f, const CoefficientField& c) {
  if (!(f.grid == c.grid)) throw DomainError("density and coefficients live on different grids");
}

// Value at a neighbour, zero outside the box.
inline double neighbour(const Density& f, std::size_t idx, const std::array<int, 3>& p, int axis, int s) {
  const int q = p[axis] + s;
  if (q < 0 || q >= f.grid.n()) return 0.0;
  const auto st = static_cast<std::ptrdiff_t>(f.grid.stride(axis));
  return f.values[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + s * st)];
}

// Second-order centred gradient with zero ghosts, component `axis`.
inline std::vector<double> centred_gradient(const Density& f, int axis) {
  const VelocityGrid& g = f.grid;
  std::vector<double> out(g.size());
  const double inv = 0.5 / g.h();
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto p = g.ijk(idx);
    out[idx] = (neighbour(f, idx, p, axis, 1) - neighbour(f, idx, p, axis, -1)) * inv;
  }
  return out;
}

// Divergence of face fluxes. flux[axis][idx] is the flux through the face
// between idx and idx + stride(axis); faces on the box boundary carry zero.
inline std::vector<double> divergence(const VelocityGrid& g, const std::array<std::vector<double>, 3>& flux) {
  const int n = g.n();
  const double inv = 1.0 / g.h();
  std::vector<double> q(g.size(), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::size_t idx = g.index(i, j, k);
        const int p[3] = {i, j, k};
        double s = 0.0;
        for (int ax = 0; ax < 3; ++ax) {
          if (p[ax] < n - 1) s += flux[ax][idx];
          if (p[ax] > 0) s -= flux[ax][idx - g.stride(ax)];
        }
        q[idx] = s * inv;
      }
  });
  return q;
}

}  // namespace detail

// Flux a_bar grad f - b_bar f through interior faces, averaged from the two
// adjacent cells except for the diagonal term, which uses the compact difference.
inline std::array<std::vector<double>, 3> central_fluxes(const Density& f, const CoefficientField& c) {
  detail::require_same_grid(f, c);
  const VelocityGrid& g = f.grid;
  const int n = g.n();
  const double h = g.h();
  std::array<std::vector<double>, 3> grad;
  for (int ax = 0; ax < 3; ++ax) grad[ax] = detail::centred_gradient(f, ax);
  std::array<std::vector<double>, 3> flux;
  for (int ax = 0; ax < 3; ++ax) {
    flux[ax].assign(g.size(), 0.0);
    const std::size_t st = g.stride(ax);
    const auto& aii = c.a_of(ax, ax);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
      const int i = static_cast<int>(ii);
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const int p[3] = {i, j, k};
          if (p[ax] == n - 1) continue;
          const std::size_t i0 = g.index(i, j, k), i1 = i0 + st;
          double F = 0.5 * (aii[i0] + aii[i1]) * (f.values[i1] - f.values[i0]) / h;
          for (int col = 0; col < 3; ++col) {
            if (col == ax) continue;
            const auto& aij = c.a_of(ax, col);
            F += 0.5 * (aij[i0] * grad[col][i0] + aij[i1] * grad[col][i1]);
          }
          F -= 0.5 * (c.b[ax][i0] * f.values[i0] + c.b[ax][i1] * f.values[i1]);
          flux[ax][i0] = F;
        }
    });
  }
  return flux;
}

// Conservative form d_i(a_bar_ij d_j f - b_bar_i f); sums to zero exactly.
inline std::vector<double> collision_div(const Density& f, const CoefficientField& c) {
  return detail::divergence(f.grid, central_fluxes(f, c));
}

// Nondivergence form a_bar_ij d_ij f + c_bar f with centred second differences.
inline std::vector<double> collision_nondiv(const Density& f, const CoefficientField& c) {
  detail::require_same_grid(f, c);
  const VelocityGrid& g = f.grid;
  const int n = g.n();
  const double h2 = g.h() * g.h();
  std::vector<double> q(g.size());
  auto at = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n) return 0.0;
    return f.values[g.index(i, j, k)];
  };
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::size_t idx = g.index(i, j, k);
        const double f0 = f.values[idx];
        const int p[3] = {i, j, k};
        auto shifted = [&](int a1, int s1, int a2, int s2) {
          int r[3] = {p[0], p[1], p[2]};
          r[a1] += s1;
          r[a2] += s2;
          return at(r[0], r[1], r[2]);
        };
        double s = c.c[idx] * f0;
        for (int ax = 0; ax < 3; ++ax)
          s += c.a_of(ax, ax)[idx] * (shifted(ax, 1, ax, 0) - 2.0 * f0 + shifted(ax, -1, ax, 0)) / h2;
        for (int a1 = 0; a1 < 3; ++a1)
          for (int a2 = a1 + 1; a2 < 3; ++a2) {
            const double cross = (shifted(a1, 1, a2, 1) - shifted(a1, 1, a2, -1) - shifted(a1, -1, a2, 1) +
                                  shifted(a1, -1, a2, -1)) /
                                 (4.0 * h2);
            s += 2.0 * c.a_of(a1, a2)[idx] * cross;
          }
        q[idx] = s;
      }
  });
  return q;
}

// Largest eigenvalue of a_bar over all nodes.
inline double max_spectral_radius(const CoefficientField& c) {
  double rho = 0.0;
  Eigen::SelfAdjointEigenSolver<Mat3> es;
  for (std::size_t idx = 0; idx < c.grid.size(); ++idx) {
    es.computeDirect(c.a_at(idx), Eigen::EigenvaluesOnly);
    rho = std::max(rho, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return rho;
}

// Smallest eigenvalue of a_bar over all nodes (PSD check).
inline double min_eigenvalue(const CoefficientField& c) {
  double lo = std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Mat3> es;
  for (std::size_t idx = 0; idx < c.grid.size(); ++idx) {
    es.computeDirect(c.a_at(idx), Eigen::EigenvaluesOnly);
    lo = std::min(lo, es.eigenvalues().minCoeff());
  }
  return lo;
}

}  // namespace landau::kinetic
