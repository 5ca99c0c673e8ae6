#pragma once

#include "landau/lifted/operator.hpp"

namespace landau::lifted {

// I(F) = (kappa / 2)(i_par + i_sph + i_rad) for the three functionals
//   i_par = int |grad_z F|^2 / F r^2,  i_sph = int |grad_sigma F|^2 / F,  i_rad = int (d_r F)^2 / F r^2
// over dz dr dsigma. i_total is the Cartesian value 2 i(f).
struct FisherDecomposition {
  double i_par = 0.0;
  double i_sph = 0.0;
  double i_rad = 0.0;
  double i_total = 0.0;
  double kappa = lifted::kappa;

  [[nodiscard]] double lifted_total() const { return 0.5 * kappa * (i_par + i_sph + i_rad); }
  [[nodiscard]] double identity_defect() const { return std::abs(lifted_total() - i_total) / i_total; }
};

namespace detail {

// Samples of f at z + r sigma_k. Node k pairs with its antipode for w = z - r sigma_k.
inline std::vector<PointSample> ray_samples(const Interpolant& f, const Vec3& z, double r, const sphere::SphereGrid& g) {
  const auto& nodes = g.nodes();
  std::vector<PointSample> out(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) out[k] = f.sample(z + r * nodes[k]);
  return out;
}

// Deterministic reduction of per-z partial sums.
template <std::size_t K, class Fn>
std::array<double, K> sum_over_z(std::size_t nz, Fn&& per_z) {
  std::vector<std::array<double, K>> part(nz);
  parallel_for(nz, [&](std::size_t iz) { part[iz] = per_z(iz); });
  std::array<double, K> out{};
  for (std::size_t c = 0; c < K; ++c) {
    CompensatedSum s;
    for (const auto& p : part) s.add(p[c]);
    out[c] = s.value();
  }
  return out;
}

}  // namespace detail

// Pointwise chain rule on ln F = ln f(v) + ln f(w): grad_z ln F = p + q and
// grad_y ln F = p - q with p, q the log-gradients of f at v and w, y = r sigma.
inline FisherDecomposition fisher_decompose(const Interpolant& f, const ZRQuadrature& quad) {
  const sphere::SphereGrid& g = *quad.sphere;
  const auto& ws = g.weights();
  const auto& nodes = g.nodes();
  const double floor = f.floor();
  const auto sums = detail::sum_over_z<3>(quad.z.size(), [&](std::size_t iz) {
    CompensatedSum par, sph, rad;
    for (std::size_t ir = 0; ir < quad.r.size(); ++ir) {
      const double r = quad.r[ir];
      const double w0 = quad.z_weights[iz] * quad.r_weights[ir] * r * r;
      const auto s = detail::ray_samples(f, quad.z[iz], r, g);
      for (std::size_t k = 0; k < s.size(); ++k) {
        const PointSample& a = s[k];
        const PointSample& b = s[g.antipode(k)];
        if (!(a.value > floor && b.value > floor)) continue;
        const double F = a.value * b.value;
        const Vec3 sum = a.grad_log + b.grad_log, diff = a.grad_log - b.grad_log;
        const double radial = nodes[k].dot(diff);
        const double w = w0 * ws[k] * F;
        par.add(w * sum.squaredNorm());
        rad.add(w * radial * radial);
        sph.add(w * (diff.squaredNorm() - radial * radial));
      }
    }
    return std::array<double, 3>{par.value(), sph.value(), rad.value()};
  });
  FisherDecomposition d;
  d.i_par = sums[0];
  d.i_sph = sums[1];
  d.i_rad = sums[2];
  d.i_total = 2.0 * kinetic::fisher_3d(f.density());
  return d;
}

inline FisherDecomposition fisher_decompose(const Density& f, const ZRQuadrature& quad) {
  return fisher_decompose(Interpolant(f), quad);
}

// Quadrature of f (x) f with the Jacobian; equals M(f)^2 up to quadrature error.
inline double product_mass(const Interpolant& f, const ZRQuadrature& quad) {
  const sphere::SphereGrid& g = *quad.sphere;
  const auto& ws = g.weights();
  const auto sums = detail::sum_over_z<1>(quad.z.size(), [&](std::size_t iz) {
    CompensatedSum m;
    for (std::size_t ir = 0; ir < quad.r.size(); ++ir) {
      const double r = quad.r[ir];
      const auto s = detail::ray_samples(f, quad.z[iz], r, g);
      for (std::size_t k = 0; k < s.size(); ++k)
        m.add(kappa * r * r * quad.z_weights[iz] * quad.r_weights[ir] * ws[k] * s[k].value * s[g.antipode(k)].value);
    }
    return std::array<double, 1>{m.value()};
  });
  return sums[0];
}

// Time derivatives of the three functionals at t = 0 along the lifted flow,
// plus the closed-form terms of the two-term bound:
//   gamma2_term = int alpha Gamma_2(ln F) F,  radial_term = int (gamma^2 / 4) alpha |grad_sigma ln F|^2 F,
// both over dz dr dsigma with the lifted diffusivity.
struct LayerDerivatives {
  double d_par = 0.0;
  double d_sph = 0.0;
  double d_rad = 0.0;
  double gamma2_term = 0.0;
  double radial_term = 0.0;
  double richardson_gap = 0.0;  // worst relative disagreement of the two probes
  std::size_t slices_used = 0;

  [[nodiscard]] double d_total() const { return d_par + d_sph + d_rad; }
};

struct ProbeError : NumericalError {
  using NumericalError::NumericalError;
};

struct LayerOptions {
  double slice_cutoff = 1e-12;  // skip slices whose peak is below this fraction of max(f)^2
  double node_cutoff = 1e-10;   // nodes below this fraction of the slice peak are masked
  double agreement = 0.05;      // Richardson tolerance
};

// Each slice is advanced spectrally: F(t) = e^{t a Lap} F, grad_z F(t) = e^{t a Lap} grad_z F and
// d_r F(t) = e^{t a Lap} d_r F + t a' Lap F(t), with a the lifted diffusivity at that r.
// Central differences at +-dt_probe and +-dt_probe/2 are Richardson extrapolated.
inline LayerDerivatives layer_derivatives(const Interpolant& f, const Potential& pot, const ZRQuadrature& quad,
                                          double dt_probe, const LayerOptions& opt = {}) {
  if (!(dt_probe > 0.0)) throw DomainError("probe step must be positive");
  const sphere::SphereGrid& g = *quad.sphere;
  const auto& ws = g.weights();
  const auto& nodes = g.nodes();
  const std::size_t N = g.size();
  const double fmax = f.density().max_value();
  const double slice_floor = opt.slice_cutoff * fmax * fmax;
  const double quarter_g2 = 0.25 * pot.gamma() * pot.gamma();
  const std::array<double, 4> times{-dt_probe, dt_probe, -0.5 * dt_probe, 0.5 * dt_probe};

  // Per z: gamma2, radial, used slices, then I_par, I_sph, I_rad at the four probe times.
  constexpr std::size_t K = 3 + 12;
  const auto sums = detail::sum_over_z<K>(quad.z.size(), [&](std::size_t iz) {
    std::array<CompensatedSum, K> acc;
    double used = 0.0;
    sphere::SphereField field(quad.sphere);
    std::vector<double> value(N), gr(N);
    std::array<std::vector<double>, 3> gz;
    for (auto& v : gz) v.resize(N);
    for (std::size_t ir = 0; ir < quad.r.size(); ++ir) {
      const double r = quad.r[ir];
      const auto s = detail::ray_samples(f, quad.z[iz], r, g);
      double peak = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        const PointSample& a = s[k];
        const PointSample& b = s[g.antipode(k)];
        const double F = a.value * b.value;
        value[k] = F;
        peak = std::max(peak, F);
        const Vec3 sum = F * (a.grad_log + b.grad_log);
        for (int c = 0; c < 3; ++c) gz[c][k] = F > 0.0 ? sum[c] : 0.0;
        gr[k] = F > 0.0 ? F * nodes[k].dot(a.grad_log - b.grad_log) : 0.0;
      }
      // Slices reaching the floor or the box edge lie in the far tail of f (x) f.
      bool positive = true;
      for (std::size_t k = 0; k < N && positive; ++k) positive = s[k].value > 0.0;
      if (!positive || !(peak > slice_floor)) continue;
      used += 1.0;
      const double floor = opt.node_cutoff * peak;
      std::vector<char> mask(N);
      for (std::size_t k = 0; k < N; ++k) mask[k] = value[k] > floor;

      auto even_spectrum = [&](const std::vector<double>& v) {
        field.values = v;
        sphere::Spectrum c = sphere::analyze(field);
        for (int l = 1; l <= c.bandlimit(); l += 2)
          for (int m = -l; m <= l; ++m) c(l, m) = 0.0;
        return c;
      };
      const sphere::Spectrum cF = even_spectrum(value);
      std::array<sphere::Spectrum, 3> cZ{even_spectrum(gz[0]), even_spectrum(gz[1]), even_spectrum(gz[2])};
      const sphere::Spectrum cR = even_spectrum(gr);

      const double a = lifted_alpha(pot, r), da = lifted_alpha_derivative(pot, r);
      const double wzr = quad.z_weights[iz] * quad.r_weights[ir];

      // Closed-form terms at t = 0 from the spectrum of ln F, which is far
      // smoother than F itself.
      {
        for (std::size_t k = 0; k < N; ++k) field.values[k] = std::log(s[k].value);
        for (std::size_t k = 0; k < N; ++k) {
          const std::size_t an = g.antipode(k);
          if (an > k) field.values[k] = field.values[an] = field.values[k] + field.values[an];
        }
        const sphere::Gamma2Parts p = sphere::gamma2_parts_of_log(sphere::analyze(field), g);
        acc[0].add(wzr * a * p.gamma2);
        acc[1].add(wzr * quarter_g2 * a * p.fisher);
      }

      for (std::size_t it = 0; it < times.size(); ++it) {
        const double t = times[it];
        const sphere::Jet J = sphere::jet(sphere::heat_flow(cF, a, t, true), g);
        std::array<sphere::SphereField, 3> Z;
        for (int c = 0; c < 3; ++c) Z[c] = sphere::synthesize(sphere::heat_flow(cZ[c], a, t, true), quad.sphere);
        const sphere::SphereField R = sphere::synthesize(sphere::heat_flow(cR, a, t, true), quad.sphere);
        CompensatedSum ip, is, ir2;
        for (std::size_t k = 0; k < N; ++k) {
          const double F = J.value[k];
          if (!mask[k] || !(F > 0.0)) continue;
          const double z2 = Z[0].values[k] * Z[0].values[k] + Z[1].values[k] * Z[1].values[k] + Z[2].values[k] * Z[2].values[k];
          const double dr = R.values[k] + t * da * J.laplacian(k);
          ip.add(ws[k] * z2 / F);
          is.add(ws[k] * J.grad_sq(k) / F);
          ir2.add(ws[k] * dr * dr / F);
        }
        acc[3 + 3 * it].add(wzr * r * r * ip.value());
        acc[4 + 3 * it].add(wzr * is.value());
        acc[5 + 3 * it].add(wzr * r * r * ir2.value());
      }
    }
    acc[2].add(used);
    std::array<double, K> out{};
    for (std::size_t c = 0; c < K; ++c) out[c] = acc[c].value();
    return out;
  });

  LayerDerivatives d;
  d.gamma2_term = sums[0];
  d.radial_term = sums[1];
  d.slices_used = static_cast<std::size_t>(sums[2]);
  std::array<double, 3> coarse{}, fine{}, best{};
  for (int c = 0; c < 3; ++c) {
    coarse[c] = (sums[3 + 3 + c] - sums[3 + c]) / (2.0 * dt_probe);
    fine[c] = (sums[3 + 9 + c] - sums[3 + 6 + c]) / dt_probe;
    best[c] = (4.0 * fine[c] - coarse[c]) / 3.0;
  }
  d.d_par = best[0];
  d.d_sph = best[1];
  d.d_rad = best[2];
  const double scale = std::abs(fine[0]) + std::abs(fine[1]) + std::abs(fine[2]);
  for (int c = 0; c < 3; ++c) {
    const double gap = std::abs(coarse[c] - fine[c]) / std::max(std::abs(fine[c]), 1e-3 * scale);
    d.richardson_gap = std::isnan(gap) ? gap : std::max(d.richardson_gap, gap);
    if (std::isnan(gap)) break;
  }
  if (!(d.richardson_gap <= opt.agreement)) {
    std::ostringstream os;
    os << "layer_derivatives: probes at dt = " << dt_probe << " and " << 0.5 * dt_probe << " disagree by "
       << d.richardson_gap << "; choose a smaller probe step";
    throw ProbeError(os.str());
  }
  return d;
}

// Worst slice of alpha int Gamma_2(ln F) F - (gamma^2/4) alpha int |grad ln F|^2 F.
struct BECheck {
  double min_margin = INFINITY;
  double scale = 0.0;  // largest alpha int Gamma_2(ln F) F over the slices
  double min_ratio = INFINITY;  // smallest Gamma_2 / Fisher among non-constant slices
  Vec3 worst_z = Vec3::Zero();
  double worst_r = 0.0;
  std::size_t slices = 0;
};

inline double slice_margin(const sphere::Spectrum& log_field, const sphere::SphereGrid& grid, const Potential& pot,
                           double r) {
  const sphere::Gamma2Parts p = sphere::gamma2_parts_of_log(log_field, grid);
  return lifted_alpha(pot, r) * (p.gamma2 - 0.25 * pot.gamma() * pot.gamma() * p.fisher);
}

// Only slices positive at every node are tested; the rest lie in the far tail.
inline BECheck pointwise_be_check(const Interpolant& f, const Potential& pot, const ZRQuadrature& quad) {
  const sphere::SphereGrid& g = *quad.sphere;
  const std::size_t N = g.size();
  const double q = 0.25 * pot.gamma() * pot.gamma();
  std::vector<BECheck> part(quad.z.size());
  parallel_for(quad.z.size(), [&](std::size_t iz) {
    BECheck& c = part[iz];
    sphere::SphereField logs(quad.sphere);
    for (std::size_t ir = 0; ir < quad.r.size(); ++ir) {
      const double r = quad.r[ir];
      const auto s = detail::ray_samples(f, quad.z[iz], r, g);
      bool ok = true;
      for (std::size_t k = 0; k < N && ok; ++k) {
        ok = s[k].value > f.floor();
        if (ok) logs.values[k] = std::log(s[k].value);
      }
      if (!ok) continue;
      for (std::size_t k = 0; k < N; ++k) {
        const std::size_t a = g.antipode(k);
        if (a > k) logs.values[k] = logs.values[a] = logs.values[k] + logs.values[a];
      }
      const sphere::Gamma2Parts p = sphere::gamma2_parts_of_log(sphere::analyze(logs), g);
      const double alpha = lifted_alpha(pot, r);
      const double margin = alpha * (p.gamma2 - q * p.fisher);
      ++c.slices;
      c.scale = std::max(c.scale, alpha * p.gamma2);
      if (p.fisher > 1e-12 * p.mass) c.min_ratio = std::min(c.min_ratio, p.gamma2 / p.fisher);
      if (margin < c.min_margin) {
        c.min_margin = margin;
        c.worst_z = quad.z[iz];
        c.worst_r = r;
      }
    }
  });
  BECheck out;
  for (const BECheck& c : part) {
    out.slices += c.slices;
    out.scale = std::max(out.scale, c.scale);
    out.min_ratio = std::min(out.min_ratio, c.min_ratio);
    if (c.min_margin < out.min_margin) {
      out.min_margin = c.min_margin;
      out.worst_z = c.worst_z;
      out.worst_r = c.worst_r;
    }
  }
  return out;
}

}  // namespace landau::lifted
