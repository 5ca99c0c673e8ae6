#pragma once

#include "landau/kinetic/diagnostics.hpp"

#include <array>

namespace landau::lifted {

using kinetic::Density;
using kinetic::VelocityGrid;

// tricubic: tensor cubic B-spline interpolating ln max(f, floor). The result is
// positive, C^2 (so slices have continuous Hessians in sigma) and exact at the
// nodes; for a Gaussian, ln f is quadratic and only the far ends feel the
// boundary closure. trilinear and nearest act on f itself and are debugging
// modes: second- and first-order values, and nearest carries no gradient.
enum class Interpolation { tricubic, trilinear, nearest };

struct PointSample {
  double value = 0.0;
  Vec3 grad = Vec3::Zero();
  Vec3 grad_log = Vec3::Zero();  // meaningful only when value > 0
};

namespace detail {

// Uniform cubic B-spline weights and t-derivatives for coefficients i-1..i+2.
inline void bspline4(double t, double w[4], double dw[4]) {
  const double s = 1.0 - t, t2 = t * t, t3 = t2 * t;
  w[0] = s * s * s / 6.0;
  w[1] = (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0;
  w[2] = (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0;
  w[3] = t3 / 6.0;
  dw[0] = -0.5 * s * s;
  dw[1] = 0.5 * (3.0 * t2 - 4.0 * t);
  dw[2] = 0.5 * (-3.0 * t2 + 2.0 * t + 1.0);
  dw[3] = 0.5 * t2;
}

// In place along one strided line: c[i-1] + 4 c[i] + c[i+1] = 6 u[i] inside,
// c = u at both ends.
inline void spline_line(double* u, std::size_t stride, std::size_t m, std::vector<double>& cp, std::vector<double>& d) {
  cp.resize(m);
  d.resize(m);
  cp[0] = 0.0;
  d[0] = u[0];
  for (std::size_t i = 1; i + 1 < m; ++i) {
    const double denom = 4.0 - cp[i - 1];
    cp[i] = 1.0 / denom;
    d[i] = (6.0 * u[i * stride] - d[i - 1]) / denom;
  }
  d[m - 1] = u[(m - 1) * stride];
  for (std::size_t i = m - 1; i-- > 0;) u[i * stride] = d[i] - cp[i] * u[(i + 1) * stride];
}

}  // namespace detail

class Interpolant {
 public:
  static constexpr int ghost = 3;

  explicit Interpolant(const Density& f, Interpolation mode = Interpolation::tricubic)
      : f_(f), mode_(mode), floor_(kinetic::floor_fraction * f.max_value()) {
    if (!(f_.max_value() > 0.0)) throw DomainError("interpolant needs a density with positive values");
    if (mode_ == Interpolation::tricubic) build_spline();
  }

  [[nodiscard]] const VelocityGrid& grid() const { return f_.grid; }
  [[nodiscard]] const Density& density() const { return f_; }
  [[nodiscard]] Interpolation mode() const { return mode_; }
  [[nodiscard]] double floor() const { return floor_; }

  [[nodiscard]] double operator()(const Vec3& v) const { return sample(v).value; }

  // Zero outside the box [-l, l]^3 and, in tricubic mode, at or below the floor.
  [[nodiscard]] PointSample sample(const Vec3& v) const {
    const VelocityGrid& g = f_.grid;
    const int n = g.n();
    const double h = g.h();
    std::array<double, 3> u{};
    for (int ax = 0; ax < 3; ++ax) {
      u[ax] = (v[ax] - g.coord(0)) / h;
      if (!(u[ax] >= -0.5 && u[ax] <= n - 0.5)) return {};
    }
    switch (mode_) {
      case Interpolation::nearest: {
        std::array<int, 3> p{};
        for (int ax = 0; ax < 3; ++ax) p[ax] = std::clamp(static_cast<int>(std::lround(u[ax])), 0, n - 1);
        PointSample out;
        out.value = f_.values[g.index(p[0], p[1], p[2])];
        return out;
      }
      case Interpolation::trilinear: return trilinear(u, h);
      case Interpolation::tricubic: break;
    }
    std::array<int, 3> s{};
    double w[3][4], dw[3][4];
    for (int ax = 0; ax < 3; ++ax) {
      const double p = u[ax] + ghost;
      const int i = std::min(static_cast<int>(std::floor(p)), m_ - 3);
      s[ax] = i - 1;
      detail::bspline4(p - i, w[ax], dw[ax]);
    }
    const std::size_t m = static_cast<std::size_t>(m_);
    double val = 0.0;
    Vec3 grad = Vec3::Zero();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const double* c = &coeff_[(static_cast<std::size_t>(s[0] + a) * m + (s[1] + b)) * m + s[2]];
        double row = 0.0, drow = 0.0;
        for (int k = 0; k < 4; ++k) {
          row += w[2][k] * c[k];
          drow += dw[2][k] * c[k];
        }
        val += w[0][a] * w[1][b] * row;
        grad[0] += dw[0][a] * w[1][b] * row;
        grad[1] += w[0][a] * dw[1][b] * row;
        grad[2] += w[0][a] * w[1][b] * drow;
      }
    PointSample out;
    const double value = std::exp(val);
    if (!(value > floor_)) return out;
    out.value = value;
    out.grad_log = grad / h;
    out.grad = value * out.grad_log;
    return out;
  }

 private:
  void build_spline() {
    const int n = f_.grid.n();
    m_ = n + 2 * ghost;
    const std::size_t m = static_cast<std::size_t>(m_);
    coeff_.assign(m * m * m, 0.0);
    const double lf = std::log(floor_);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double x = f_.values[f_.grid.index(i, j, k)];
          coeff_[((i + ghost) * m + (j + ghost)) * m + (k + ghost)] = x > floor_ ? std::log(x) : lf;
        }
    const std::size_t stride[3] = {m * m, m, 1};
    // Ghost layers by quadratic extrapolation, exact for the logarithm of a Gaussian.
    // Axis ax runs over lines whose earlier axes are already extended.
    for (int ax = 0; ax < 3; ++ax) {
      const int o1 = (ax + 1) % 3, o2 = (ax + 2) % 3;
      auto span = [&](int axis) { return axis < ax ? std::pair{0, m_} : std::pair{ghost, ghost + n}; };
      const auto [a0, a1] = span(o1);
      const auto [b0, b1] = span(o2);
      const std::size_t st = stride[ax];
      for (int p = a0; p < a1; ++p)
        for (int q = b0; q < b1; ++q) {
          double* line = &coeff_[p * stride[o1] + q * stride[o2]];
          for (int g = ghost - 1; g >= 0; --g)
            line[g * st] = 3.0 * line[(g + 1) * st] - 3.0 * line[(g + 2) * st] + line[(g + 3) * st];
          for (int g = ghost + n; g < m_; ++g)
            line[g * st] = 3.0 * line[(g - 1) * st] - 3.0 * line[(g - 2) * st] + line[(g - 3) * st];
        }
    }
    std::vector<double> cp, d;
    for (int ax = 0; ax < 3; ++ax) {
      const int o1 = (ax + 1) % 3, o2 = (ax + 2) % 3;
      for (int p = 0; p < m_; ++p)
        for (int q = 0; q < m_; ++q) detail::spline_line(&coeff_[p * stride[o1] + q * stride[o2]], stride[ax], m, cp, d);
    }
  }

  [[nodiscard]] PointSample trilinear(const std::array<double, 3>& u, double h) const {
    const VelocityGrid& g = f_.grid;
    const int n = g.n();
    std::array<int, 3> s{};
    std::array<double, 3> t{};
    for (int ax = 0; ax < 3; ++ax) {
      s[ax] = std::clamp(static_cast<int>(std::floor(u[ax])), 0, n - 2);
      t[ax] = u[ax] - s[ax];
    }
    double val = 0.0;
    Vec3 grad = Vec3::Zero();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const double x = f_.values[g.index(s[0] + a, s[1] + b, s[2] + c)];
          const double wa = a ? t[0] : 1.0 - t[0], wb = b ? t[1] : 1.0 - t[1], wc = c ? t[2] : 1.0 - t[2];
          const double da = a ? 1.0 : -1.0, db = b ? 1.0 : -1.0, dc = c ? 1.0 : -1.0;
          val += wa * wb * wc * x;
          grad += Vec3(da * wb * wc, wa * db * wc, wa * wb * dc) * x;
        }
    PointSample out;
    if (val > 0.0) {
      out.value = val;
      out.grad = grad / h;
      out.grad_log = out.grad / val;
    }
    return out;
  }

  Density f_;
  Interpolation mode_;
  double floor_;
  int m_ = 0;
  std::vector<double> coeff_;  // B-spline coefficients of ln f on the ghost-extended grid
};

// (f (x) g)(v, w) = f(v) g(w), zero when either point leaves its box.
inline double tensor_eval(const Interpolant& f, const Interpolant& g, const Vec3& v, const Vec3& w) {
  return f(v) * g(w);
}

inline double tensor_eval(const Density& f, const Density& g, const Vec3& v, const Vec3& w,
                          Interpolation mode = Interpolation::tricubic) {
  return tensor_eval(Interpolant(f, mode), Interpolant(g, mode), v, w);
}

}  // namespace landau::lifted
