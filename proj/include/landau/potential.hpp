#pragma once

#include "landau/core.hpp"

#include <cmath>
#include <numbers>
#include <optional>

namespace landau {

// Power-law interaction alpha(r) = coupling * r^gamma.
class Potential {
 public:
  static constexpr double coulomb_gamma = -3.0;

  // Coupling that makes -d_ij a_ij * f collapse to f at gamma = -3.
  static double default_coupling(double gamma) {
    return gamma == coulomb_gamma ? 1.0 / (8.0 * std::numbers::pi) : 1.0;
  }

  explicit Potential(double gamma, std::optional<double> coupling = std::nullopt)
      : gamma_(gamma), coupling_(coupling.value_or(default_coupling(gamma))) {
    if (!std::isfinite(gamma_)) throw DomainError("potential exponent must be finite");
    if (!(coupling_ > 0.0) || !std::isfinite(coupling_))
      throw DomainError("potential coupling must be positive");
  }

  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] double coupling() const { return coupling_; }

  [[nodiscard]] double alpha(double r) const {
    if (!(r > 0.0)) throw DomainError("alpha(r) needs r > 0");
    return coupling_ * std::pow(r, gamma_);
  }

  // alpha'(r)
  [[nodiscard]] double alpha_derivative(double r) const { return gamma_ * alpha(r) / r; }

  // ((sqrt alpha)')^2 = (gamma^2 / 4) alpha / r^2
  [[nodiscard]] double sqrt_alpha_slope_squared(double r) const {
    return 0.25 * gamma_ * gamma_ * alpha(r) / (r * r);
  }

  // a(z) = alpha(|z|) (|z|^2 I - z z^T)
  [[nodiscard]] Mat3 kernel(const Vec3& z) const {
    const double r2 = z.squaredNorm();
    if (!(r2 > 0.0)) throw DomainError("kernel matrix is singular at z = 0");
    const double a = alpha(std::sqrt(r2));
    return a * (r2 * Mat3::Identity() - z * z.transpose());
  }

  // (sup_r r alpha' / 2 alpha)^2, exact for power laws.
  [[nodiscard]] double lambda_functional() const { return 0.25 * gamma_ * gamma_; }

  [[nodiscard]] bool monotonicity_admissible(double lambda) const {
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
    return lambda_functional() <= lambda;
  }

  [[nodiscard]] Potential with_coupling(double c) const { return Potential(gamma_, c); }

 private:
  double gamma_;
  double coupling_;
};

}  // namespace landau
