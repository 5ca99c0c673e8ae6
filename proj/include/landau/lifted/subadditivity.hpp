#pragma once

#include "landau/core.hpp"

#include <functional>
#include <memory>
#include <numbers>

namespace landau::lifted {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Positive density on R^6 = (v, w) with its gradient (d_v F, d_w F) stacked.
struct SixDensity {
  std::function<double(const Vec6&)> value;
  std::function<Vec6(const Vec6&)> gradient;
};

// Midpoint rule with `nodes` points per axis on [-half_width, half_width].
struct ProductRule {
  int nodes = 12;
  double half_width = 6.0;
};

struct SubadditivityResult {
  double joint = 0.0;   // I(F)
  double first = 0.0;   // i of the v-marginal
  double second = 0.0;  // i of the w-marginal

  [[nodiscard]] double gap() const { return joint - first - second; }
};

// The marginals and their gradients come from the same rule, so the discrete
// Cauchy-Schwarz inequality makes the gap nonnegative up to rounding.
inline SubadditivityResult subadditivity(const SixDensity& F, const ProductRule& rule) {
  const int n = rule.nodes;
  if (n < 2 || !(rule.half_width > 0.0)) throw ConfigError("product rule needs >= 2 nodes and a positive extent");
  const double h = 2.0 * rule.half_width / n;
  const std::size_t n3 = static_cast<std::size_t>(n) * n * n;
  std::vector<Vec3> pts(n3);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        pts[(static_cast<std::size_t>(i) * n + j) * n + k] =
            Vec3(-rule.half_width + (i + 0.5) * h, -rule.half_width + (j + 0.5) * h, -rule.half_width + (k + 0.5) * h);
  const double w3 = h * h * h;

  // Row iv: joint Fisher over w and the v-marginal; the w-marginal is
  // accumulated per row and reduced afterwards in row order.
  std::vector<double> joint(n3), fv(n3);
  std::vector<Vec3> gv(n3);
  const std::size_t rows = n3;
  std::vector<double> fw_total(n3, 0.0);
  std::vector<Vec3> gw_total(n3, Vec3::Zero());
  // Chunk rows so the w-marginal partials stay small.
  const std::size_t chunk = 64;
  const std::size_t chunks = (rows + chunk - 1) / chunk;
  std::vector<std::vector<double>> part_f(chunks);
  std::vector<std::vector<Vec3>> part_g(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    part_f[c].assign(n3, 0.0);
    part_g[c].assign(n3, Vec3::Zero());
    for (std::size_t iv = c * chunk; iv < std::min(rows, (c + 1) * chunk); ++iv) {
      CompensatedSum J, m;
      Vec3 grad = Vec3::Zero();
      Vec6 x;
      x.head<3>() = pts[iv];
      for (std::size_t iw = 0; iw < n3; ++iw) {
        x.tail<3>() = pts[iw];
        const double val = F.value(x);
        if (!(val > 0.0)) continue;
        const Vec6 g = F.gradient(x);
        J.add(g.squaredNorm() / val);
        m.add(val);
        grad += g.head<3>();
        part_f[c][iw] += val;
        part_g[c][iw] += g.tail<3>();
      }
      joint[iv] = J.value();
      fv[iv] = m.value();
      gv[iv] = grad;
    }
  });
  for (std::size_t c = 0; c < chunks; ++c)
    for (std::size_t iw = 0; iw < n3; ++iw) {
      fw_total[iw] += part_f[c][iw];
      gw_total[iw] += part_g[c][iw];
    }
  CompensatedSum I, a, b;
  for (std::size_t i = 0; i < n3; ++i) {
    I.add(joint[i]);
    if (fv[i] > 0.0) a.add(gv[i].squaredNorm() / fv[i]);
    if (fw_total[i] > 0.0) b.add(gw_total[i].squaredNorm() / fw_total[i]);
  }
  // Marginal densities carry one factor w3, their Fisher integral another.
  return {I.value() * w3 * w3, a.value() * w3 * w3, b.value() * w3 * w3};
}

inline double subadditivity_gap(const SixDensity& F, const ProductRule& rule) { return subadditivity(F, rule).gap(); }

// Normalized Gaussian mixture on R^6.
struct GaussianComponent {
  double weight;
  Vec6 mean;
  Mat6 precision;
};

inline SixDensity gaussian_mixture(std::vector<GaussianComponent> parts) {
  std::vector<double> norm;
  for (const auto& p : parts) {
    const double det = p.precision.determinant();
    if (!(det > 0.0) || !(p.weight > 0.0)) throw DomainError("mixture components need positive weight and precision");
    norm.push_back(p.weight * std::sqrt(det) / std::pow(2.0 * std::numbers::pi, 3.0));
  }
  auto shared = std::make_shared<std::pair<std::vector<GaussianComponent>, std::vector<double>>>(std::move(parts), std::move(norm));
  SixDensity F;
  F.value = [shared](const Vec6& x) {
    double s = 0.0;
    for (std::size_t c = 0; c < shared->first.size(); ++c) {
      const auto& p = shared->first[c];
      const Vec6 d = x - p.mean;
      s += shared->second[c] * std::exp(-0.5 * d.dot(p.precision * d));
    }
    return s;
  };
  F.gradient = [shared](const Vec6& x) {
    Vec6 g = Vec6::Zero();
    for (std::size_t c = 0; c < shared->first.size(); ++c) {
      const auto& p = shared->first[c];
      const Vec6 d = x - p.mean;
      const Vec6 pd = p.precision * d;
      g -= shared->second[c] * std::exp(-0.5 * d.dot(pd)) * pd;
    }
    return g;
  };
  return F;
}

// Unit variances, correlation rho between v_i and w_i: I(F) = 6 / (1 - rho^2).
inline SixDensity correlated_gaussian(double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("correlation must lie in (-1, 1)");
  Mat6 P = Mat6::Zero();
  const double s = 1.0 / (1.0 - rho * rho);
  for (int i = 0; i < 3; ++i) {
    P(i, i) = P(i + 3, i + 3) = s;
    P(i, i + 3) = P(i + 3, i) = -rho * s;
  }
  return gaussian_mixture({{1.0, Vec6::Zero(), P}});
}

}  // namespace landau::lifted
