#pragma once

#include "landau/kinetic/operator.hpp"
#include "landau/lifted/fisher.hpp"

namespace landau::lifted {

// pi[Q(f (x) f)](v) = d_i int a_ij(v - w) (f(w) d_j f(v) - f(v) d_j f(w)) dw
//                   = d_i (a_bar_ij d_j f - f (a_ij * d_j f)),
// with the convolutions on the FFT engine and fourth-order differences.
inline std::vector<double> marginal_q(const Density& f, kinetic::ConvolutionEngine& engine) {
  using kinetic::sym_index;
  const VelocityGrid& g = f.grid;
  const kinetic::ExtendedTensor abar = engine.convolve(f);
  const auto df = kinetic::detail::centred_gradient(g, f.values, 4);
  std::array<kinetic::ExtendedTensor, 3> adf;
  for (int j = 0; j < 3; ++j) adf[j] = engine.convolve(Density(g, df[j]));
  const int n = g.n();
  std::vector<double> div(g.size(), 0.0);
  for (int i = 0; i < 3; ++i) {
    std::vector<double> J(g.size());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const std::size_t idx = g.index(a, b, c), e = abar.index(a, b, c);
          double s = 0.0;
          for (int j = 0; j < 3; ++j)
            s += abar.a[sym_index(i, j)][e] * df[j][idx] - f.values[idx] * adf[j].a[sym_index(i, j)][e];
          J[idx] = s;
        }
    const auto dJ = kinetic::detail::centred_gradient(g, J, 4);
    for (std::size_t idx = 0; idx < g.size(); ++idx) div[idx] += dJ[i][idx];
  }
  return div;
}

// Relative L1 distance between marginal_q and collision_div on the same grid.
inline double marginal_defect(const Density& f, kinetic::ConvolutionEngine& engine) {
  const VelocityGrid& g = f.grid;
  const auto div = marginal_q(f, engine);
  const auto ref = kinetic::collision_div(f, kinetic::compute_coefficients(f, engine));
  CompensatedSum num, den;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    num.add(std::abs(div[idx] - ref[idx]));
    den.add(std::abs(ref[idx]));
  }
  if (!(den.value() > 0.0)) return 0.0;
  return num.value() / den.value();
}

inline double marginal_defect(const Density& f, const Potential& pot) {
  kinetic::ConvolutionEngine engine(f.grid, pot);
  return marginal_defect(f, engine);
}

// Smooth test function on velocity space with its derivatives.
struct TestMoment {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
  std::function<Mat3(const Vec3&)> hessian;
};

struct ContactPair {
  double lifted = 0.0;  // int phi d/dt pi(F) at t = 0, assembled from the slices
  double direct = 0.0;  // int phi collision_div(f)
  double scale = 0.0;   // int |phi| |collision_div(f)|
  double marginal = 0.0;  // int phi marginal_q(f)

  [[nodiscard]] double defect() const { return std::abs(lifted - direct) / scale; }
};

// d/dt int phi(v) F dv dw = kappa int r^2 alpha_bar(r) int F Lap_sigma psi dsigma dr dz with
// psi(sigma) = phi(z + r sigma); for y = r sigma,
//   Lap_sigma psi = r^2 (Lap phi - sigma^T D^2 phi sigma) - 2 r sigma . grad phi.
inline ContactPair first_order_contact(const Interpolant& f, const Potential& pot, const ZRQuadrature& quad,
                                       const TestMoment& phi) {
  const sphere::SphereGrid& g = *quad.sphere;
  const auto& ws = g.weights();
  const auto& nodes = g.nodes();
  const auto sums = detail::sum_over_z<1>(quad.z.size(), [&](std::size_t iz) {
    CompensatedSum s;
    for (std::size_t ir = 0; ir < quad.r.size(); ++ir) {
      const double r = quad.r[ir];
      const auto smp = detail::ray_samples(f, quad.z[iz], r, g);
      const double w0 = kappa * r * r * quad.z_weights[iz] * quad.r_weights[ir] * lifted_alpha(pot, r);
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double F = smp[k].value * smp[g.antipode(k)].value;
        if (F == 0.0) continue;
        const Vec3& sg = nodes[k];
        const Vec3 v = quad.z[iz] + r * sg;
        const Mat3 H = phi.hessian(v);
        const double lap = r * r * (H.trace() - sg.dot(H * sg)) - 2.0 * r * sg.dot(phi.gradient(v));
        s.add(w0 * ws[k] * F * lap);
      }
    }
    return std::array<double, 1>{s.value()};
  });
  const Density& d = f.density();
  kinetic::ConvolutionEngine engine(d.grid, pot);
  const auto q = kinetic::collision_div(d, kinetic::compute_coefficients(d, engine));
  const auto qm = marginal_q(d, engine);
  CompensatedSum direct, scale, marginal;
  for (std::size_t idx = 0; idx < q.size(); ++idx) {
    const double p = phi.value(d.grid.node(idx));
    direct.add(p * q[idx]);
    scale.add(std::abs(p * q[idx]));
    marginal.add(p * qm[idx]);
  }
  const double h3 = d.grid.cell_volume();
  return {sums[0], direct.value() * h3, scale.value() * h3, marginal.value() * h3};
}

}  // namespace landau::lifted
