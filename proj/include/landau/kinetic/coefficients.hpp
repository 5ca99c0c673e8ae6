#pragma once

#include "landau/kinetic/grid.hpp"
#include "landau/potential.hpp"
#include "landau/quadrature.hpp"

#include <fftw3.h>

#include <array>
#include <complex>
#include <memory>
#include <mutex>

namespace landau::kinetic {

// Symmetric 3x3 components stored as xx, xy, xz, yy, yz, zz.
inline constexpr int sym_index(int i, int j) {
  constexpr int table[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return table[i][j];
}

struct CoefficientField {
  VelocityGrid grid;
  std::array<std::vector<double>, 6> a;  // a_bar
  std::array<std::vector<double>, 3> b;  // b_bar_i = d_j a_bar_ij
  std::vector<double> c;                 // c_bar = -d_ij a_bar_ij

  explicit CoefficientField(const VelocityGrid& g) : grid(g), c(g.size(), 0.0) {
    for (auto& x : a) x.assign(g.size(), 0.0);
    for (auto& x : b) x.assign(g.size(), 0.0);
  }

  [[nodiscard]] const std::vector<double>& a_of(int i, int j) const { return a[sym_index(i, j)]; }

  [[nodiscard]] Mat3 a_at(std::size_t idx) const {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = a[sym_index(i, j)][idx];
    return m;
  }
};

// Integral of |u|^p over the unit cube centred at the origin, p > -3.
// By homogeneity it reduces to a smooth face integral.
inline double cube_power_moment(double p) {
  if (!(p > -3.0)) throw DomainError("cube moment diverges for p <= -3");
  const GaussRule r = gauss_legendre(40, -0.5, 0.5);
  CompensatedSum s;
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    for (std::size_t j = 0; j < r.nodes.size(); ++j) {
      const double q = 0.25 + r.nodes[i] * r.nodes[i] + r.nodes[j] * r.nodes[j];
      s.add(r.weights[i] * r.weights[j] * std::pow(q, 0.5 * p));
    }
  return 3.0 / (p + 3.0) * s.value();
}

// Value used for the kernel at zero offset: the cell average of a_ij over the
// cell around the origin, which is isotropic, (2/3) c h^(gamma+2) C(gamma+2) delta_ij.
inline double origin_cell_average(const Potential& pot, double h) {
  return pot.coupling() * (2.0 / 3.0) * cube_power_moment(pot.gamma() + 2.0) * std::pow(h, pot.gamma() + 2.0);
}

inline void require_supported(const Potential& pot) {
  if (pot.gamma() < -3.0) throw DomainError("potential exponents below -3 are not supported by the kernel regularization");
}

namespace detail {

inline int smooth_size(int at_least) {
  for (int n = at_least;; ++n) {
    int m = n;
    for (int p : {2, 3, 5}) while (m % p == 0) m /= p;
    if (m == 1) return n;
  }
}

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};
using Plan = std::unique_ptr<fftw_plan_s, PlanDeleter>;

}  // namespace detail

// Kernel matrix sampled on the difference grid, ready for a linear (not
// circular) convolution onto the grid extended by `ghost` layers.
class KernelTable {
 public:
  static constexpr int ghost = 2;

  KernelTable(const VelocityGrid& g, const Potential& pot) : grid_(g), pot_(pot) {
    require_supported(pot);
    const int n = g.n();
    reach_ = n - 1 + ghost;
    origin_ = origin_cell_average(pot, g.h());
  }

  [[nodiscard]] int reach() const { return reach_; }
  [[nodiscard]] const VelocityGrid& grid() const { return grid_; }
  [[nodiscard]] const Potential& potential() const { return pot_; }

  // h^3 * a_ij(d h) for an integer offset d; the origin uses the cell average.
  [[nodiscard]] double weight(int comp, int dx, int dy, int dz) const {
    static constexpr int ii[6] = {0, 0, 0, 1, 1, 2}, jj[6] = {0, 1, 2, 1, 2, 2};
    const double h = grid_.h(), vol = grid_.cell_volume();
    if (dx == 0 && dy == 0 && dz == 0) return ii[comp] == jj[comp] ? vol * origin_ : 0.0;
    const Vec3 z(dx * h, dy * h, dz * h);
    const double r2 = z.squaredNorm();
    const double alpha = pot_.alpha(std::sqrt(r2));
    return vol * alpha * ((ii[comp] == jj[comp] ? r2 : 0.0) - z[ii[comp]] * z[jj[comp]]);
  }

 private:
  VelocityGrid grid_;
  Potential pot_;
  int reach_ = 0;
  double origin_ = 0.0;
};

// a_bar on the grid extended by KernelTable::ghost layers, per component.
struct ExtendedTensor {
  int n = 0, ne = 0;
  std::array<std::vector<double>, 6> a;
  [[nodiscard]] std::size_t index(int i, int j, int k) const {  // i, j, k in [-ghost, n - 1 + ghost]
    const int G = KernelTable::ghost;
    return (static_cast<std::size_t>(i + G) * ne + (j + G)) * ne + (k + G);
  }
};

// Fast path: zero-padded FFT convolution with cached kernel transforms.
class ConvolutionEngine {
 public:
  ConvolutionEngine(const VelocityGrid& g, const Potential& pot) : table_(g, pot) {
    const int n = g.n();
    N_ = detail::smooth_size(2 * table_.reach() + 1);
    const std::size_t real_size = static_cast<std::size_t>(N_) * N_ * N_;
    spec_size_ = static_cast<std::size_t>(N_) * N_ * (N_ / 2 + 1);
    real_ = detail::fftw_buffer<double>(real_size);
    spec_ = detail::fftw_buffer<fftw_complex>(spec_size_);
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      forward_.reset(fftw_plan_dft_r2c_3d(N_, N_, N_, real_.get(), spec_.get(), FFTW_ESTIMATE));
      backward_.reset(fftw_plan_dft_c2r_3d(N_, N_, N_, spec_.get(), real_.get(), FFTW_ESTIMATE));
    }
    if (!forward_ || !backward_) throw NumericalError("fftw planning failed");
    const int R = table_.reach();
    for (int c = 0; c < 6; ++c) {
      std::fill(real_.get(), real_.get() + real_size, 0.0);
      for (int dx = -R; dx <= R; ++dx)
        for (int dy = -R; dy <= R; ++dy)
          for (int dz = -R; dz <= R; ++dz)
            real_[wrap(dx, dy, dz)] = table_.weight(c, dx, dy, dz);
      fftw_execute(forward_.get());
      kernel_hat_[c].assign(reinterpret_cast<std::complex<double>*>(spec_.get()),
                            reinterpret_cast<std::complex<double>*>(spec_.get()) + spec_size_);
    }
    (void)n;
  }

  [[nodiscard]] const KernelTable& table() const { return table_; }
  [[nodiscard]] int fft_size() const { return N_; }

  ExtendedTensor convolve(const Density& f) {
    const VelocityGrid& g = table_.grid();
    if (!(f.grid == g)) throw DomainError("density grid does not match convolution engine");
    const int n = g.n(), G = KernelTable::ghost;
    const std::size_t real_size = static_cast<std::size_t>(N_) * N_ * N_;
    std::fill(real_.get(), real_.get() + real_size, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) real_[wrap(i, j, k)] = f.values[g.index(i, j, k)];
    fftw_execute(forward_.get());
    const std::vector<std::complex<double>> f_hat(reinterpret_cast<std::complex<double>*>(spec_.get()),
                                                  reinterpret_cast<std::complex<double>*>(spec_.get()) + spec_size_);
    ExtendedTensor out;
    out.n = n;
    out.ne = n + 2 * G;
    const double inv = 1.0 / static_cast<double>(real_size);
    auto* s = reinterpret_cast<std::complex<double>*>(spec_.get());
    for (int c = 0; c < 6; ++c) {
      for (std::size_t q = 0; q < spec_size_; ++q) s[q] = kernel_hat_[c][q] * f_hat[q];
      fftw_execute(backward_.get());
      auto& dst = out.a[c];
      dst.resize(static_cast<std::size_t>(out.ne) * out.ne * out.ne);
      for (int i = -G; i < n + G; ++i)
        for (int j = -G; j < n + G; ++j)
          for (int k = -G; k < n + G; ++k) dst[out.index(i, j, k)] = real_[wrap(i, j, k)] * inv;
    }
    return out;
  }

 private:
  [[nodiscard]] std::size_t wrap(int i, int j, int k) const {
    auto w = [&](int x) { return static_cast<std::size_t>(((x % N_) + N_) % N_); };
    return (w(i) * N_ + w(j)) * N_ + w(k);
  }

  KernelTable table_;
  int N_ = 0;
  std::size_t spec_size_ = 0;
  detail::FftwBuffer<double> real_;
  detail::FftwBuffer<fftw_complex> spec_;
  detail::Plan forward_, backward_;
  std::array<std::vector<std::complex<double>>, 6> kernel_hat_;
};

// Reference path: direct summation over all source cells.
inline ExtendedTensor convolve_direct(const KernelTable& table, const Density& f) {
  const VelocityGrid& g = table.grid();
  const int n = g.n(), G = KernelTable::ghost;
  ExtendedTensor out;
  out.n = n;
  out.ne = n + 2 * G;
  const std::size_t ext = static_cast<std::size_t>(out.ne) * out.ne * out.ne;
  for (auto& c : out.a) c.assign(ext, 0.0);
  parallel_for(static_cast<std::size_t>(out.ne), [&](std::size_t ii) {
    const int i = static_cast<int>(ii) - G;
    for (int j = -G; j < n + G; ++j)
      for (int k = -G; k < n + G; ++k) {
        std::array<CompensatedSum, 6> acc;
        for (int p = 0; p < n; ++p)
          for (int q = 0; q < n; ++q)
            for (int r = 0; r < n; ++r) {
              const double fv = f.values[g.index(p, q, r)];
              if (fv == 0.0) continue;
              for (int c = 0; c < 6; ++c) acc[c].add(table.weight(c, i - p, j - q, k - r) * fv);
            }
        for (int c = 0; c < 6; ++c) out.a[c][out.index(i, j, k)] = acc[c].value();
      }
  });
  return out;
}

// Fourth-order centred differences on the extended grid.
inline CoefficientField coefficients_from(const ExtendedTensor& e, const VelocityGrid& g) {
  const int n = g.n();
  const double h = g.h();
  CoefficientField out(g);
  static constexpr int off[4] = {-2, -1, 1, 2};
  static constexpr double d1[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
  static constexpr double d2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  auto shifted = [&](int axis, int s, int i, int j, int k) {
    int p[3] = {i, j, k};
    p[axis] += s;
    return e.index(p[0], p[1], p[2]);
  };
  auto shifted2 = [&](int a1, int s1, int a2, int s2, int i, int j, int k) {
    int p[3] = {i, j, k};
    p[a1] += s1;
    p[a2] += s2;
    return e.index(p[0], p[1], p[2]);
  };
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::size_t idx = g.index(i, j, k);
        for (int c = 0; c < 6; ++c) out.a[c][idx] = e.a[c][e.index(i, j, k)];
        for (int r = 0; r < 3; ++r) {
          double s = 0.0;
          for (int col = 0; col < 3; ++col) {
            const auto& comp = e.a[sym_index(r, col)];
            for (int q = 0; q < 4; ++q) s += d1[q] * comp[shifted(col, off[q], i, j, k)];
          }
          out.b[r][idx] = s / h;
        }
        double c = 0.0;
        for (int ax = 0; ax < 3; ++ax) {
          const auto& comp = e.a[sym_index(ax, ax)];
          for (int q = -2; q <= 2; ++q) c -= d2[q + 2] * comp[shifted(ax, q, i, j, k)];
        }
        for (int a1 = 0; a1 < 3; ++a1)
          for (int a2 = 0; a2 < 3; ++a2) {
            if (a1 == a2) continue;
            const auto& comp = e.a[sym_index(a1, a2)];
            for (int q1 = 0; q1 < 4; ++q1)
              for (int q2 = 0; q2 < 4; ++q2)
                c -= d1[q1] * d1[q2] * comp[shifted2(a1, off[q1], a2, off[q2], i, j, k)];
          }
        out.c[idx] = c / (h * h);
      }
  });
  return out;
}

enum class ConvolutionMethod { fft, direct };

inline CoefficientField compute_coefficients(const Density& f, const Potential& pot,
                                             ConvolutionMethod method = ConvolutionMethod::fft) {
  require_supported(pot);
  if (method == ConvolutionMethod::direct) return coefficients_from(convolve_direct(KernelTable(f.grid, pot), f), f.grid);
  ConvolutionEngine engine(f.grid, pot);
  return coefficients_from(engine.convolve(f), f.grid);
}

inline CoefficientField compute_coefficients(const Density& f, ConvolutionEngine& engine) {
  return coefficients_from(engine.convolve(f), f.grid);
}

}  // namespace landau::kinetic
