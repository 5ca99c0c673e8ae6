#pragma once

#include "landau/sphere/transform.hpp"

#include <cmath>
#include <sstream>

namespace landau::sphere {

inline double integrate(const SphereField& f) {
  CompensatedSum s;
  const auto& w = f.grid->weights();
  for (std::size_t k = 0; k < w.size(); ++k) s.add(w[k] * f.values[k]);
  return s.value();
}

inline SphereField from_spectrum(Spectrum c, const GridPtr& grid) {
  SphereField f = synthesize(c, grid);
  f.coeffs = std::move(c);
  return f;
}

inline SphereField laplace_beltrami(const SphereField& f) {
  Spectrum scratch;
  Spectrum c = coefficients_of(f, scratch);
  for (int l = 0; l <= c.bandlimit(); ++l)
    for (int m = -l; m <= l; ++m) c(l, m) *= -double(l) * (l + 1);
  return from_spectrum(std::move(c), f.grid);
}

// Exact solution of d_t u = alpha * Laplace-Beltrami u. Negative times are
// ill-posed and only accepted when allow_backward is set (test use).
inline Spectrum heat_flow(Spectrum c, double alpha, double t, bool allow_backward = false) {
  if (t < 0.0 && !allow_backward) throw DomainError("backward heat flow requested outside test mode");
  if (!(alpha > 0.0)) throw DomainError("heat flow diffusivity must be positive");
  for (int l = 1; l <= c.bandlimit(); ++l) {
    const double decay = std::exp(-alpha * l * (l + 1.0) * t);
    for (int m = -l; m <= l; ++m) c(l, m) *= decay;
  }
  return c;
}

inline SphereField heat_flow(const SphereField& f, double alpha, double t, bool allow_backward = false) {
  Spectrum scratch;
  return from_spectrum(heat_flow(coefficients_of(f, scratch), alpha, t, allow_backward), f.grid);
}

inline void require_positive(const SphereField& f, const char* what) {
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (!(f.values[k] > 0.0)) {
      std::ostringstream os;
      os << what << ": nonpositive value " << f.values[k] << " at node " << k;
      throw PositivityError(os.str());
    }
  }
}

// Integrals of Gamma_2(ln f) f and |grad ln f|^2 f.
struct Gamma2Parts {
  double gamma2 = 0.0;
  double fisher = 0.0;
  double mass = 0.0;
};

// Works from the spectrum of g = ln f on `eval`, so fields of the form exp(g)
// with bandlimited g are handled without truncation.
inline Gamma2Parts gamma2_parts_of_log(const Spectrum& g, const SphereGrid& eval) {
  const Jet J = jet(g, eval);
  double gmax = -INFINITY;
  for (double v : J.value) gmax = std::max(gmax, v);
  CompensatedSum num, den, mass;
  const auto& w = eval.weights();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double f = std::exp(J.value[k] - gmax);
    const double grad2 = J.grad_sq(k);
    num.add(w[k] * (J.hess_sq(k) + grad2) * f);
    den.add(w[k] * grad2 * f);
    mass.add(w[k] * f);
  }
  const double scale = std::exp(gmax);
  return {num.value() * scale, den.value() * scale, mass.value() * scale};
}

inline Gamma2Parts gamma2_parts(const SphereField& f) {
  require_positive(f, "gamma2 functional");
  SphereField logf(f.grid);
  for (std::size_t k = 0; k < f.values.size(); ++k) logf.values[k] = std::log(f.values[k]);
  const Spectrum g = analyze(logf);
  const Jet J = jet(g, *f.grid);
  CompensatedSum num, den, mass;
  const auto& w = f.grid->weights();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double grad2 = J.grad_sq(k);
    num.add(w[k] * (J.hess_sq(k) + grad2) * f.values[k]);
    den.add(w[k] * grad2 * f.values[k]);
    mass.add(w[k] * f.values[k]);
  }
  return {num.value(), den.value(), mass.value()};
}

inline double gamma2_functional(const SphereField& f) { return gamma2_parts(f).gamma2; }
inline double sph_fisher(const SphereField& f) { return gamma2_parts(f).fisher; }

inline double ratio_from(const Gamma2Parts& p) {
  if (!(p.fisher > 1e-12 * p.mass))
    throw DomainError("Bakry-Emery ratio is indeterminate for a near-constant field");
  return p.gamma2 / p.fisher;
}

inline double be_ratio(const SphereField& f) { return ratio_from(gamma2_parts(f)); }

inline double be_ratio_of_log(const Spectrum& g, const SphereGrid& eval) {
  return ratio_from(gamma2_parts_of_log(g, eval));
}

// Same integrals evaluated directly from the jet of F itself (no logarithm is
// analyzed): grad ln F = grad F / F and Hess ln F = Hess F / F - grad ln F (x) grad ln F.
// Nodes with F <= floor contribute nothing.
struct JetIntegrals {
  double fisher = 0.0;
  double gamma2 = 0.0;
};

inline JetIntegrals jet_integrals(const Jet& J, const SphereGrid& g, double floor, bool want_gamma2 = true) {
  CompensatedSum fi, g2;
  const auto& w = g.weights();
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double F = J.value[k];
    if (!(F > floor)) continue;
    const double a = J.d_theta[k] / F, b = J.d_phi[k] / F;
    const double grad2 = a * a + b * b;
    fi.add(w[k] * grad2 * F);
    if (want_gamma2) {
      const double tt = J.h_tt[k] / F - a * a;
      const double tp = J.h_tp[k] / F - a * b;
      const double pp = J.h_pp[k] / F - b * b;
      g2.add(w[k] * (tt * tt + 2.0 * tp * tp + pp * pp + grad2) * F);
    }
  }
  return {fi.value(), g2.value()};
}

// KL(F, G) = integral of F ln(F / G); masses must agree to 1e-8 relative.
inline double kl_divergence(const SphereField& F, const SphereField& G) {
  require_positive(F, "kl divergence (first argument)");
  require_positive(G, "kl divergence (second argument)");
  if (F.grid->size() != G.grid->size()) throw DomainError("kl divergence: grids differ");
  const double mf = integrate(F), mg = integrate(G);
  if (std::abs(mf - mg) > 1e-8 * std::max(std::abs(mf), std::abs(mg))) {
    std::ostringstream os;
    os << "kl divergence: masses differ (" << mf << " vs " << mg << ")";
    throw DomainError(os.str());
  }
  CompensatedSum s;
  const auto& w = F.grid->weights();
  for (std::size_t k = 0; k < w.size(); ++k)
    s.add(w[k] * F.values[k] * std::log(F.values[k] / G.values[k]));
  return s.value();
}

// Integral of F |grad ln(F / G)|^2 (the relative Fisher information).
inline double relative_fisher(const SphereField& F, const SphereField& G) {
  require_positive(F, "relative fisher");
  require_positive(G, "relative fisher");
  SphereField ratio(F.grid);
  for (std::size_t k = 0; k < F.values.size(); ++k) ratio.values[k] = std::log(F.values[k] / G.values[k]);
  const Jet J = jet(analyze(ratio), *F.grid);
  CompensatedSum s;
  const auto& w = F.grid->weights();
  for (std::size_t k = 0; k < w.size(); ++k) s.add(w[k] * J.grad_sq(k) * F.values[k]);
  return s.value();
}

}  // namespace landau::sphere
