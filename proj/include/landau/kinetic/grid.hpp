#pragma once

#include "landau/core.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace landau::kinetic {

// Cell-centred uniform grid on [-l, l]^3: v_i = -l + (i + 1/2) h, h = 2l/n.
class VelocityGrid {
 public:
  VelocityGrid(int n, double half_width) : n_(n), l_(half_width) {
    if (n_ < 8 || n_ % 2 != 0) throw ConfigError("velocity grid needs an even n >= 8");
    if (!(l_ > 0.0) || !std::isfinite(l_)) throw ConfigError("velocity grid half width must be positive");
  }

  [[nodiscard]] int n() const { return n_; }
  [[nodiscard]] double half_width() const { return l_; }
  [[nodiscard]] double h() const { return 2.0 * l_ / n_; }
  [[nodiscard]] double cell_volume() const { return h() * h() * h(); }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }
  [[nodiscard]] double coord(int i) const { return -l_ + (i + 0.5) * h(); }
  [[nodiscard]] std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
  }
  [[nodiscard]] Vec3 node(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
  [[nodiscard]] Vec3 node(std::size_t idx) const {
    const int k = static_cast<int>(idx % n_), j = static_cast<int>((idx / n_) % n_), i = static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_));
    return node(i, j, k);
  }
  [[nodiscard]] std::array<int, 3> ijk(std::size_t idx) const {
    return {static_cast<int>(idx / (static_cast<std::size_t>(n_) * n_)), static_cast<int>((idx / n_) % n_),
            static_cast<int>(idx % n_)};
  }
  // Stride of one step along axis 0, 1, 2.
  [[nodiscard]] std::size_t stride(int axis) const {
    return axis == 0 ? static_cast<std::size_t>(n_) * n_ : axis == 1 ? static_cast<std::size_t>(n_) : 1;
  }

  bool operator==(const VelocityGrid&) const = default;

 private:
  int n_;
  double l_;
};

// Nonnegative density sampled at the cell centres; integrals use weight h^3.
struct Density {
  VelocityGrid grid;
  std::vector<double> values;

  explicit Density(const VelocityGrid& g) : grid(g), values(g.size(), 0.0) {}
  Density(const VelocityGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw DomainError("density size does not match grid");
  }

  [[nodiscard]] double mass() const {
    CompensatedSum s;
    for (double v : values) s.add(v);
    return s.value() * grid.cell_volume();
  }
  [[nodiscard]] double max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
  }

  // Largest value on the outermost layer of cells, relative to the maximum.
  [[nodiscard]] double boundary_ratio() const {
    const int n = grid.n();
    double b = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          if (i != 0 && i != n - 1 && j != 0 && j != n - 1 && k != 0 && k != n - 1) continue;
          b = std::max(b, values[grid.index(i, j, k)]);
        }
    const double m = max_value();
    return m > 0.0 ? b / m : 0.0;
  }

  void validate() const {
    for (double v : values)
      if (!std::isfinite(v) || v < 0.0) throw DomainError("density values must be finite and nonnegative");
    if (!(mass() > 0.0)) throw DomainError("density must have positive mass");
  }
};

inline constexpr double boundary_decay_limit = 1e-8;

inline bool check_boundary_decay(const Density& f, bool throw_on_violation) {
  const double ratio = f.boundary_ratio();
  if (ratio <= boundary_decay_limit) return true;
  std::ostringstream os;
  os << "density does not decay at the box boundary (boundary/max = " << ratio << " > " << boundary_decay_limit
     << "); enlarge grid.half_width";
  if (throw_on_violation) throw DomainError(os.str());
  warn(os.str());
  return false;
}

inline Density maxwellian(const VelocityGrid& g, double mass, const Vec3& mean, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("maxwellian temperature must be positive");
  if (!(mass > 0.0)) throw DomainError("maxwellian mass must be positive");
  Density f(g);
  const double norm = mass * std::pow(2.0 * std::numbers::pi * temperature, -1.5);
  for (std::size_t idx = 0; idx < g.size(); ++idx)
    f.values[idx] = norm * std::exp(-(g.node(idx) - mean).squaredNorm() / (2.0 * temperature));
  check_boundary_decay(f, true);
  return f;
}

// Equal-weight pair of Maxwellians at +-offset along the first axis.
inline Density bimodal(const VelocityGrid& g, double mass = 1.0, double offset = 1.5, double temperature = 0.5) {
  Density a = maxwellian(g, 0.5 * mass, Vec3(offset, 0, 0), temperature);
  const Density b = maxwellian(g, 0.5 * mass, Vec3(-offset, 0, 0), temperature);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
  return a;
}

}  // namespace landau::kinetic
