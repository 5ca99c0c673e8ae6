#pragma once

#include "landau/core.hpp"
#include "landau/quadrature.hpp"

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <vector>

namespace landau::sphere {

// Gauss-Legendre in cos(theta) times uniform azimuth. With L+2 polar rows and
// 2L+2 azimuthal columns the rule integrates every product Y_lm conj(Y_l'm')
// with l, l' <= L exactly; the spare row and the Nyquist column make content
// above degree L visible as a round-trip residual. The node set is closed
// under sigma -> -sigma and antipodal node vectors are exact negations.
class SphereGrid {
 public:
  explicit SphereGrid(int bandlimit) : L_(bandlimit) {
    if (L_ < 2) throw ConfigError("sphere grid needs bandlimit >= 2");
    rows_ = L_ + 2;
    cols_ = 2 * L_ + 2;
    const GaussRule gl = gauss_legendre(rows_);
    x_ = gl.nodes;
    s_.resize(rows_);
    for (int i = 0; i < rows_; ++i) s_[i] = std::sqrt((1.0 - x_[i]) * (1.0 + x_[i]));

    const double dphi = 2.0 * std::numbers::pi / cols_;
    cos_table_.resize(cols_);
    sin_table_.resize(cols_);
    for (int k = 0; k < cols_; ++k) {
      cos_table_[k] = std::cos(dphi * k);
      sin_table_[k] = std::sin(dphi * k);
    }

    nodes_.resize(size());
    weights_.resize(size());
    const int half = cols_ / 2;
    for (int i = 0; i < rows_; ++i) {
      for (int j = 0; j < cols_; ++j) weights_[index(i, j)] = gl.weights[i] * dphi;
      for (int j = 0; j < half; ++j)
        nodes_[index(i, j)] = Vec3(s_[i] * cos_table_[j], s_[i] * sin_table_[j], x_[i]);
    }
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < half; ++j) nodes_[antipode(index(i, j))] = -nodes_[index(i, j)];

    build_legendre_tables();
  }

  [[nodiscard]] int bandlimit() const { return L_; }
  [[nodiscard]] int rows() const { return rows_; }
  [[nodiscard]] int cols() const { return cols_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(rows_) * cols_; }
  [[nodiscard]] std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols_ + col;
  }
  [[nodiscard]] std::size_t antipode(std::size_t k) const {
    const int i = static_cast<int>(k / cols_), j = static_cast<int>(k % cols_);
    return index(rows_ - 1 - i, (j + cols_ / 2) % cols_);
  }

  [[nodiscard]] const std::vector<Vec3>& nodes() const { return nodes_; }
  [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
  [[nodiscard]] double cos_theta(int row) const { return x_[row]; }
  [[nodiscard]] double sin_theta(int row) const { return s_[row]; }
  [[nodiscard]] double row_weight(int row) const { return weights_[index(row, 0)]; }

  // cos(m phi_j), sin(m phi_j) through an exact integer phase.
  [[nodiscard]] double cos_m_phi(int m, int col) const { return cos_table_[(m * col) % cols_]; }
  [[nodiscard]] double sin_m_phi(int m, int col) const { return sin_table_[(m * col) % cols_]; }

  // Orthonormal tangent frame at a node: e_theta, e_phi.
  [[nodiscard]] Vec3 e_theta(std::size_t k) const {
    const int i = static_cast<int>(k / cols_), j = static_cast<int>(k % cols_);
    return {x_[i] * cos_table_[j], x_[i] * sin_table_[j], -s_[i]};
  }
  [[nodiscard]] Vec3 e_phi(std::size_t k) const {
    const int j = static_cast<int>(k % cols_);
    return {-sin_table_[j], cos_table_[j], 0.0};
  }

  // Triangular index for 0 <= m <= l <= L.
  [[nodiscard]] static std::size_t tri(int l, int m) {
    return static_cast<std::size_t>(l) * (l + 1) / 2 + m;
  }
  [[nodiscard]] std::size_t tri_size() const { return tri(L_ + 1, 0); }

  // Normalized associated Legendre functions (Condon-Shortley phase) and their
  // first two polar-angle derivatives, tabulated at each row.
  [[nodiscard]] double plm(int row, int l, int m) const { return p_[row * tri_size() + tri(l, m)]; }
  [[nodiscard]] double dplm(int row, int l, int m) const { return dp_[row * tri_size() + tri(l, m)]; }
  [[nodiscard]] double d2plm(int row, int l, int m) const { return d2p_[row * tri_size() + tri(l, m)]; }

 private:
  void build_legendre_tables() {
    const std::size_t T = tri_size();
    p_.assign(rows_ * T, 0.0);
    dp_.assign(rows_ * T, 0.0);
    d2p_.assign(rows_ * T, 0.0);
    for (int i = 0; i < rows_; ++i) {
      const double x = x_[i], s = s_[i];
      double* P = &p_[i * T];
      double* D = &dp_[i * T];
      double* D2 = &d2p_[i * T];
      double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
      for (int m = 0; m <= L_; ++m) {
        if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
        P[tri(m, m)] = pmm;
        if (m + 1 <= L_) P[tri(m + 1, m)] = std::sqrt(2.0 * m + 3.0) * x * pmm;
        for (int l = m + 2; l <= L_; ++l) {
          const double a = std::sqrt((4.0 * l * l - 1.0) / (double(l) * l - double(m) * m));
          const double b = std::sqrt(((l - 1.0) * (l - 1.0) - double(m) * m) /
                                     (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
          P[tri(l, m)] = a * (x * P[tri(l - 1, m)] - b * P[tri(l - 2, m)]);
        }
      }
      const double cot = x / s;
      for (int l = 0; l <= L_; ++l) {
        for (int m = 0; m <= l; ++m) {
          double d = l * x * P[tri(l, m)];
          if (l > m)
            d -= std::sqrt((2.0 * l + 1.0) * (double(l) * l - double(m) * m) / (2.0 * l - 1.0)) *
                 P[tri(l - 1, m)];
          d /= s;
          D[tri(l, m)] = d;
          D2[tri(l, m)] = -cot * d - (l * (l + 1.0) - double(m) * m / (s * s)) * P[tri(l, m)];
        }
      }
    }
  }

  int L_;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> x_, s_;
  std::vector<double> cos_table_, sin_table_;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  std::vector<double> p_, dp_, d2p_;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

inline GridPtr build_grid(int bandlimit) { return std::make_shared<const SphereGrid>(bandlimit); }

// Complex spherical-harmonic coefficients c_lm stored at l*l + l + m.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(int bandlimit)
      : L_(bandlimit), c_(static_cast<std::size_t>(bandlimit + 1) * (bandlimit + 1)) {}

  [[nodiscard]] int bandlimit() const { return L_; }
  [[nodiscard]] static std::size_t index(int l, int m) {
    return static_cast<std::size_t>(l) * l + l + m;
  }
  std::complex<double>& operator()(int l, int m) { return c_[index(l, m)]; }
  [[nodiscard]] const std::complex<double>& operator()(int l, int m) const { return c_[index(l, m)]; }
  [[nodiscard]] std::vector<std::complex<double>>& data() { return c_; }
  [[nodiscard]] const std::vector<std::complex<double>>& data() const { return c_; }

  // Coefficient of the real part of the represented function, for m >= 0.
  [[nodiscard]] std::complex<double> real_part_coefficient(int l, int m) const {
    if (m == 0) return {(*this)(l, 0).real(), 0.0};
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    return 0.5 * ((*this)(l, m) + sign * std::conj((*this)(l, -m)));
  }

  // Set c_lm and the partner c_{l,-m} so the represented function is real.
  void set_real(int l, int m, std::complex<double> v) {
    if (m == 0) {
      (*this)(l, 0) = {v.real(), 0.0};
      return;
    }
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    (*this)(l, m) = v;
    (*this)(l, -m) = sign * std::conj(v);
  }

 private:
  int L_ = 0;
  std::vector<std::complex<double>> c_;
};

// Node values on a grid, optionally paired with their coefficients.
struct SphereField {
  GridPtr grid;
  std::vector<double> values;
  std::optional<Spectrum> coeffs;

  SphereField() = default;
  explicit SphereField(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}
  SphereField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw DomainError("field size does not match grid");
  }

  [[nodiscard]] bool is_positive() const {
    for (double v : values)
      if (!(v > 0.0)) return false;
    return true;
  }

  [[nodiscard]] bool is_even() const {
    for (std::size_t k = 0; k < values.size(); ++k)
      if (values[k] != values[grid->antipode(k)]) return false;
    return true;
  }
};

template <class Fn>
SphereField sample(const GridPtr& grid, Fn&& fn) {
  SphereField f(grid);
  const auto& nodes = grid->nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) f.values[k] = fn(nodes[k]);
  return f;
}

}  // namespace landau::sphere
