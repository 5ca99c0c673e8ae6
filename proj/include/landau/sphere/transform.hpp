#pragma once

#include "landau/sphere/grid.hpp"

#include <complex>
#include <sstream>

namespace landau::sphere {

// Forward transform. Exact for fields of degree <= L.
inline Spectrum analyze(const SphereField& f) {
  const SphereGrid& g = *f.grid;
  const int L = g.bandlimit(), cols = g.cols();
  const double dphi = 2.0 * std::numbers::pi / cols;
  Spectrum out(L);
  std::vector<std::complex<double>> fm(L + 1);
  for (int i = 0; i < g.rows(); ++i) {
    const double* row = &f.values[g.index(i, 0)];
    for (int m = 0; m <= L; ++m) {
      double re = 0.0, im = 0.0;
      for (int j = 0; j < cols; ++j) {
        re += row[j] * g.cos_m_phi(m, j);
        im -= row[j] * g.sin_m_phi(m, j);
      }
      fm[m] = {re * dphi, im * dphi};
    }
    const double wi = g.row_weight(i) / dphi;
    for (int m = 0; m <= L; ++m)
      for (int l = m; l <= L; ++l) out(l, m) += wi * g.plm(i, l, m) * fm[m];
  }
  for (int l = 1; l <= L; ++l)
    for (int m = 1; m <= l; ++m) out(l, -m) = ((m % 2 == 0) ? 1.0 : -1.0) * std::conj(out(l, m));
  return out;
}

inline void check_fits(const Spectrum& c, const SphereGrid& g) {
  if (c.bandlimit() > g.bandlimit()) {
    std::ostringstream os;
    os << "spectrum of degree " << c.bandlimit() << " exceeds grid bandlimit " << g.bandlimit();
    throw DomainError(os.str());
  }
}

// Per-node derivative data of a real bandlimited function, in the orthonormal
// frame (e_theta, e_phi): value, gradient components, covariant Hessian.
struct Jet {
  std::vector<double> value, d_theta, d_phi, h_tt, h_tp, h_pp;

  explicit Jet(std::size_t n = 0)
      : value(n), d_theta(n), d_phi(n), h_tt(n), h_tp(n), h_pp(n) {}

  [[nodiscard]] double grad_sq(std::size_t k) const {
    return d_theta[k] * d_theta[k] + d_phi[k] * d_phi[k];
  }
  [[nodiscard]] double hess_sq(std::size_t k) const {
    return h_tt[k] * h_tt[k] + 2.0 * h_tp[k] * h_tp[k] + h_pp[k] * h_pp[k];
  }
  [[nodiscard]] double laplacian(std::size_t k) const { return h_tt[k] + h_pp[k]; }
};

namespace detail {

// Sums over m of weight_m * Re(A_m e^{i m phi_j}) for one row, with weight 1 at
// m = 0 and 2 otherwise (the real part of a Hermitian expansion).
inline void row_synthesis(const SphereGrid& g, const std::vector<std::complex<double>>& A, int mfactor_power,
                          bool times_i, double* out) {
  const int cols = g.cols(), L = static_cast<int>(A.size()) - 1;
  for (int j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (int m = 0; m <= L; ++m) {
      std::complex<double> a = A[m];
      if (a == 0.0) continue;
      double scale = (m == 0) ? 1.0 : 2.0;
      for (int p = 0; p < mfactor_power; ++p) scale *= m;
      if (times_i) a *= std::complex<double>(0.0, 1.0);
      acc += scale * (a.real() * g.cos_m_phi(m, j) - a.imag() * g.sin_m_phi(m, j));
    }
    out[j] = acc;
  }
}

}  // namespace detail

// Values only.
inline SphereField synthesize(const Spectrum& c, const GridPtr& grid) {
  const SphereGrid& g = *grid;
  check_fits(c, g);
  const int Lc = c.bandlimit();
  SphereField f(grid);
  std::vector<std::complex<double>> A(Lc + 1);
  for (int i = 0; i < g.rows(); ++i) {
    for (int m = 0; m <= Lc; ++m) {
      std::complex<double> acc = 0.0;
      for (int l = m; l <= Lc; ++l) acc += g.plm(i, l, m) * c.real_part_coefficient(l, m);
      A[m] = acc;
    }
    detail::row_synthesis(g, A, 0, false, &f.values[g.index(i, 0)]);
  }
  return f;
}

// Values, frame gradient and covariant Hessian at every node.
inline Jet jet(const Spectrum& c, const SphereGrid& g) {
  check_fits(c, g);
  const int Lc = c.bandlimit(), cols = g.cols();
  Jet J(g.size());
  std::vector<std::complex<double>> A(Lc + 1), B(Lc + 1), C(Lc + 1);
  std::vector<double> dphi(cols), dphiphi(cols), dthetaphi(cols);
  for (int i = 0; i < g.rows(); ++i) {
    for (int m = 0; m <= Lc; ++m) {
      std::complex<double> a = 0.0, b = 0.0, cc = 0.0;
      for (int l = m; l <= Lc; ++l) {
        const std::complex<double> k = c.real_part_coefficient(l, m);
        a += g.plm(i, l, m) * k;
        b += g.dplm(i, l, m) * k;
        cc += g.d2plm(i, l, m) * k;
      }
      A[m] = a;
      B[m] = b;
      C[m] = cc;
    }
    const std::size_t base = g.index(i, 0);
    detail::row_synthesis(g, A, 0, false, &J.value[base]);
    detail::row_synthesis(g, B, 0, false, &J.d_theta[base]);
    detail::row_synthesis(g, C, 0, false, &J.h_tt[base]);
    detail::row_synthesis(g, A, 1, true, dphi.data());
    detail::row_synthesis(g, A, 2, false, dphiphi.data());
    detail::row_synthesis(g, B, 1, true, dthetaphi.data());
    const double s = g.sin_theta(i), cot = g.cos_theta(i) / s;
    for (int j = 0; j < cols; ++j) {
      const std::size_t k = base + j;
      J.d_phi[k] = dphi[j] / s;
      J.h_tp[k] = (dthetaphi[j] - cot * dphi[j]) / s;
      J.h_pp[k] = -dphiphi[j] / (s * s) + cot * J.d_theta[k];
    }
  }
  return J;
}

struct AnalysisReport {
  Spectrum coeffs;
  double residual = 0.0;  // relative max-norm round-trip residual
  bool aliased = false;
};

// Forward transform plus a round-trip residual; content above the bandlimit
// shows up as a nonzero residual and is reported as aliasing.
inline AnalysisReport analyze_checked(const SphereField& f, double tolerance = 1e-10) {
  AnalysisReport r{analyze(f)};
  const SphereField back = synthesize(r.coeffs, f.grid);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    num = std::max(num, std::abs(back.values[k] - f.values[k]));
    den = std::max(den, std::abs(f.values[k]));
  }
  r.residual = den > 0.0 ? num / den : num;
  r.aliased = r.residual > tolerance;
  if (r.aliased) {
    std::ostringstream os;
    os << "field has content above bandlimit " << f.grid->bandlimit()
       << "; coefficients are aliased (round-trip residual " << r.residual << ")";
    warn(os.str());
  }
  return r;
}

inline const Spectrum& coefficients_of(const SphereField& f, Spectrum& scratch) {
  if (f.coeffs) return *f.coeffs;
  scratch = analyze(f);
  return scratch;
}

// Tangent vectors (Cartesian, orthogonal to sigma) of the covariant gradient.
inline std::vector<Vec3> gradient(const SphereField& f) {
  Spectrum scratch;
  const Jet J = jet(coefficients_of(f, scratch), *f.grid);
  std::vector<Vec3> out(f.grid->size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = J.d_theta[k] * f.grid->e_theta(k) + J.d_phi[k] * f.grid->e_phi(k);
  return out;
}

// Covariant Hessian as a symmetric 3x3 tensor annihilating sigma.
inline std::vector<Mat3> hessian(const SphereField& f) {
  Spectrum scratch;
  const Jet J = jet(coefficients_of(f, scratch), *f.grid);
  std::vector<Mat3> out(f.grid->size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Vec3 et = f.grid->e_theta(k), ep = f.grid->e_phi(k);
    out[k] = J.h_tt[k] * et * et.transpose() + J.h_tp[k] * (et * ep.transpose() + ep * et.transpose()) +
             J.h_pp[k] * ep * ep.transpose();
  }
  return out;
}

}  // namespace landau::sphere
