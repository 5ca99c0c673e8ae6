#pragma once

#include "landau/lifted/coordinates.hpp"
#include "landau/lifted/interpolate.hpp"
#include "landau/lifted/quadrature.hpp"
#include "landau/potential.hpp"
#include "landau/sphere/calculus.hpp"

#include <functional>
#include <sstream>

namespace landau::lifted {

// Closed-form function of (v, w) on R^6.
using SixFunction = std::function<double(const Vec3&, const Vec3&)>;

// With v - w = 2 r sigma the kernel reads a(v - w) = 4 r^2 alpha(2r) (I - sigma sigma^T),
// so the lifted operator is this diffusivity times the Laplace-Beltrami operator in sigma.
inline double lifted_alpha(const Potential& pot, double r) { return 4.0 * pot.alpha(2.0 * r); }

// d/dr of lifted_alpha.
inline double lifted_alpha_derivative(const Potential& pot, double r) {
  return pot.gamma() * lifted_alpha(pot, r) / r;
}

struct LiftedSlice {
  Vec3 z;
  double r;
  sphere::SphereField field;  // F_bar(z, r, sigma) on the sphere nodes
};

// Slice of f (x) f. Values are paired through the antipode so evenness is exact.
inline LiftedSlice make_slice(const Interpolant& f, const Vec3& z, double r, const sphere::GridPtr& grid) {
  if (!(r > 0.0)) throw DomainError("slices need r > 0");
  const auto& nodes = grid->nodes();
  std::vector<double> at(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) at[k] = f(z + r * nodes[k]);
  sphere::SphereField F(grid);
  for (std::size_t k = 0; k < nodes.size(); ++k) F.values[k] = at[k] * at[grid->antipode(k)];
  return {z, r, std::move(F)};
}

inline LiftedSlice make_slice(const SixFunction& F, const Vec3& z, double r, const sphere::GridPtr& grid) {
  if (!(r > 0.0)) throw DomainError("slices need r > 0");
  return {z, r, sphere::sample(grid, [&](const Vec3& s) { return F(z + r * s, z - r * s); })};
}

// Q(F) at (v, w) by nested centred differences along the directions (e_i, -e_i)
// of R^6, with the kernel evaluated at the shifted v - w.
inline double lifted_q_fd(const SixFunction& F, const Potential& pot, const Vec3& v, const Vec3& w, double step) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  if ((v - w).norm() <= 2.0 * step) throw DomainError("lifted_q_direct: v - w is within the stencil of the diagonal");
  const double d = 0.5 * step;
  auto unit = [](int i) {
    Vec3 e = Vec3::Zero();
    e[i] = 1.0;
    return e;
  };
  // (d_v - d_w)_j F at (p, q)
  auto dF = [&](int j, const Vec3& p, const Vec3& q) {
    const Vec3 e = d * unit(j);
    return (F(p + e, q - e) - F(p - e, q + e)) / step;
  };
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = d * unit(i);
    const Vec3 vp = v + e, wp = w - e, vm = v - e, wm = w + e;
    const Mat3 ap = pot.kernel(vp - wp), am = pot.kernel(vm - wm);
    for (int j = 0; j < 3; ++j) sum += (ap(i, j) * dF(j, vp, wp) - am(i, j) * dF(j, vm, wm)) / step;
  }
  return sum;
}

// Richardson-extrapolated Q(F). The estimates at step and step/2 must agree to
// rtol (relative to the larger of the two) plus atol, or the step is too coarse.
inline double lifted_q_direct(const SixFunction& F, const Potential& pot, const Vec3& v, const Vec3& w,
                              double step = 0.02, double rtol = 1e-2, double atol = 1e-10) {
  if ((v - w).norm() == 0.0) throw DomainError("lifted_q_direct: v = w");
  const double coarse = lifted_q_fd(F, pot, v, w, step);
  const double fine = lifted_q_fd(F, pot, v, w, 0.5 * step);
  if (std::abs(coarse - fine) > rtol * std::max(std::abs(coarse), std::abs(fine)) + atol) {
    std::ostringstream os;
    os << "lifted_q_direct: Richardson disagreement " << std::abs(coarse - fine) << " at step " << step
       << "; reduce the step";
    throw NumericalError(os.str());
  }
  return (4.0 * fine - coarse) / 3.0;
}

inline sphere::SphereField lifted_q_spherical(const LiftedSlice& slice, const Potential& pot) {
  sphere::SphereField out = sphere::laplace_beltrami(slice.field);
  const double a = lifted_alpha(pot, slice.r);
  for (double& x : out.values) x *= a;
  if (out.coeffs)
    for (auto& c : out.coeffs->data()) c *= a;
  return out;
}

// Even input stays even exactly: odd degrees are dropped before the flow and
// the node values are paired through the antipode afterwards.
inline LiftedSlice lifted_heat_step(const LiftedSlice& slice, const Potential& pot, double dt) {
  if (dt == 0.0) return slice;
  const bool even = slice.field.is_even();
  sphere::Spectrum scratch;
  sphere::Spectrum c = sphere::coefficients_of(slice.field, scratch);
  if (even)
    for (int l = 1; l <= c.bandlimit(); l += 2)
      for (int m = -l; m <= l; ++m) c(l, m) = 0.0;
  sphere::SphereField out =
      sphere::from_spectrum(sphere::heat_flow(std::move(c), lifted_alpha(pot, slice.r), dt), slice.field.grid);
  if (even) {
    const auto& g = *out.grid;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
      const std::size_t a = g.antipode(k);
      if (a > k) out.values[k] = out.values[a] = 0.5 * (out.values[k] + out.values[a]);
    }
  }
  return {slice.z, slice.r, std::move(out)};
}

}  // namespace landau::lifted
