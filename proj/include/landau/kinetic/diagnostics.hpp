#pragma once

#include "landau/kinetic/grid.hpp"

namespace landau::kinetic {

// Nodes with f <= floor_fraction * max f contribute nothing to H and i.
inline constexpr double floor_fraction = 1e-14;

struct MomentRecord {
  double t = 0.0;
  double mass = 0.0;
  Vec3 momentum = Vec3::Zero();
  double energy = 0.0;   // integral of |v|^2 / 2 f
  double entropy = 0.0;  // integral of f ln f
  double fisher = 0.0;   // integral of |grad f|^2 / f
};

inline double entropy(const Density& f) {
  const double floor = floor_fraction * f.max_value();
  CompensatedSum s;
  for (double v : f.values)
    if (v > floor) s.add(v * std::log(v));
  return s.value() * f.grid.cell_volume();
}

namespace detail {

// Centred first difference along `axis` of order 4 or 6, zero outside the box.
inline std::array<std::vector<double>, 3> centred_gradient(const VelocityGrid& g, const std::vector<double>& u, int order) {
  const int n = g.n();
  const double h = g.h();
  std::array<std::vector<double>, 3> out;
  for (auto& o : out) o.assign(g.size(), 0.0);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const auto p = g.ijk(idx);
    for (int ax = 0; ax < 3; ++ax) {
      auto at = [&](int s) {
        const int q = p[ax] + s;
        if (q < 0 || q >= n) return 0.0;
        return u[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(idx) + s * static_cast<std::ptrdiff_t>(g.stride(ax)))];
      };
      out[ax][idx] = order == 6 ? (at(3) - 9.0 * at(2) + 45.0 * at(1) - 45.0 * at(-1) + 9.0 * at(-2) - at(-3)) / (60.0 * h)
                                : (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
    }
  }
  return out;
}

}  // namespace detail

// i(f) = 4 integral |grad sqrt f|^2. The square-root form stays bounded where
// the far tail of f is rough on the grid scale, which |grad f|^2 / f does not.
inline double fisher_3d(const Density& f) {
  const double floor = floor_fraction * f.max_value();
  std::vector<double> root(f.values.size());
  for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(std::max(f.values[i], 0.0));
  const auto grad = detail::centred_gradient(f.grid, root, 6);
  CompensatedSum s;
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    if (f.values[idx] <= floor) continue;
    s.add(4.0 * (grad[0][idx] * grad[0][idx] + grad[1][idx] * grad[1][idx] + grad[2][idx] * grad[2][idx]));
  }
  return s.value() * f.grid.cell_volume();
}

// Quotient form integral |grad f|^2 / f, kept as a cross-check on smooth data.
inline double fisher_quotient(const Density& f) {
  const double floor = floor_fraction * f.max_value();
  const auto grad = detail::centred_gradient(f.grid, f.values, 4);
  CompensatedSum s;
  for (std::size_t idx = 0; idx < f.values.size(); ++idx) {
    const double v = f.values[idx];
    if (v <= floor) continue;
    s.add((grad[0][idx] * grad[0][idx] + grad[1][idx] * grad[1][idx] + grad[2][idx] * grad[2][idx]) / v);
  }
  return s.value() * f.grid.cell_volume();
}

inline MomentRecord moments(const Density& f, double t = 0.0) {
  const VelocityGrid& g = f.grid;
  MomentRecord r;
  r.t = t;
  CompensatedSum m, px, py, pz, e;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const double v = f.values[idx];
    const Vec3 x = g.node(idx);
    m.add(v);
    px.add(x[0] * v);
    py.add(x[1] * v);
    pz.add(x[2] * v);
    e.add(0.5 * x.squaredNorm() * v);
  }
  const double w = g.cell_volume();
  r.mass = m.value() * w;
  r.momentum = Vec3(px.value(), py.value(), pz.value()) * w;
  r.energy = e.value() * w;
  r.entropy = entropy(f);
  r.fisher = fisher_3d(f);
  return r;
}

// -2 integral |D^2 ln f|^2 f, the Fisher dissipation rate along the Euclidean
// heat flow. Only nodes whose full stencil is above the floor contribute.
inline double heat_flow_dissipation(const Density& f) {
  const VelocityGrid& g = f.grid;
  const int n = g.n();
  const double floor = floor_fraction * f.max_value();
  const double h = g.h();
  std::vector<double> lf(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) lf[i] = f.values[i] > floor ? std::log(f.values[i]) : 0.0;
  CompensatedSum s;
  for (int i = 1; i < n - 1; ++i)
    for (int j = 1; j < n - 1; ++j)
      for (int k = 1; k < n - 1; ++k) {
        bool ok = true;
        for (int a = -1; a <= 1 && ok; ++a)
          for (int b = -1; b <= 1 && ok; ++b)
            for (int c = -1; c <= 1 && ok; ++c) ok = f.values[g.index(i + a, j + b, k + c)] > floor;
        if (!ok) continue;
        auto L = [&](int a, int b, int c) { return lf[g.index(i + a, j + b, k + c)]; };
        Mat3 H;
        H(0, 0) = (L(1, 0, 0) - 2 * L(0, 0, 0) + L(-1, 0, 0)) / (h * h);
        H(1, 1) = (L(0, 1, 0) - 2 * L(0, 0, 0) + L(0, -1, 0)) / (h * h);
        H(2, 2) = (L(0, 0, 1) - 2 * L(0, 0, 0) + L(0, 0, -1)) / (h * h);
        H(0, 1) = H(1, 0) = (L(1, 1, 0) - L(1, -1, 0) - L(-1, 1, 0) + L(-1, -1, 0)) / (4 * h * h);
        H(0, 2) = H(2, 0) = (L(1, 0, 1) - L(1, 0, -1) - L(-1, 0, 1) + L(-1, 0, -1)) / (4 * h * h);
        H(1, 2) = H(2, 1) = (L(0, 1, 1) - L(0, 1, -1) - L(0, -1, 1) + L(0, -1, -1)) / (4 * h * h);
        s.add(H.squaredNorm() * f.values[g.index(i, j, k)]);
      }
  return -2.0 * s.value() * g.cell_volume();
}

}  // namespace landau::kinetic
