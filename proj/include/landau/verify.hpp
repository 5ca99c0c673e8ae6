#pragma once

#include "landau/config.hpp"
#include "landau/lifted/fisher.hpp"
#include "landau/lifted/marginal.hpp"
#include "landau/lifted/subadditivity.hpp"
#include "landau/report.hpp"

#include <random>

// Numerical checks behind `landau verify lifted` and `landau verify fisher`.
namespace landau::verify {

using report::make_verdict;
using report::Verdict;

struct NamedSixFunction {
  std::string name;
  lifted::SixFunction F;
};

// Closed-form test functions on R^6 for the Cartesian/spherical comparison.
inline std::vector<NamedSixFunction> lemma_test_functions() {
  return {
      {"gaussian",
       [](const Vec3& v, const Vec3& w) {
         return std::exp(-0.5 * (v[0] * v[0] + 2 * v[1] * v[1] + 0.7 * v[2] * v[2]) -
                         0.5 * (1.5 * w[0] * w[0] + 0.8 * w[1] * w[1] + w[2] * w[2]) + 0.3 * v[0] * w[1]);
       }},
      {"polynomial",
       [](const Vec3& v, const Vec3& w) {
         const double d = v.dot(w);
         return d * d + v[0] * v[0] * v[0] * w[1] + (v - w).squaredNorm() * v[2] + 2.0;
       }},
      {"trigonometric",
       [](const Vec3& v, const Vec3& w) {
         return std::exp(0.3 * std::sin(v[0] + 2 * w[1]) + 0.2 * std::cos(v[2] - w[0]) + 0.1 * v[1] * w[2]);
       }},
  };
}

struct LemmaStudy {
  std::vector<double> steps;
  std::vector<std::vector<double>> errors;  // per function, per step; relative to max |spherical|
  std::vector<std::string> names;

  [[nodiscard]] double finest_error() const {
    double e = 0.0;
    for (const auto& row : errors) e = std::max(e, row.back());
    return e;
  }
  // Largest |p - 2| over consecutive refinements of every function.
  [[nodiscard]] double worst_order_gap() const {
    double g = 0.0;
    for (const auto& row : errors)
      for (std::size_t k = 1; k < row.size(); ++k)
        g = std::max(g, std::abs(std::log(row[k - 1] / row[k]) / std::log(steps[k - 1] / steps[k]) - 2.0));
    return g;
  }
};

// Finite differences of Q(F) in Cartesian coordinates against the lifted
// diffusivity times the Laplace-Beltrami operator of the slice, on three
// slices and a spread of sphere nodes.
inline LemmaStudy lemma_study(const Potential& pot, std::vector<double> steps = {0.1, 0.05, 0.025, 0.0125},
                              int bandlimit = 24) {
  const auto grid = sphere::build_grid(bandlimit);
  const std::vector<std::pair<Vec3, double>> at = {
      {Vec3(0.2, -0.1, 0.3), 0.7}, {Vec3(-0.4, 0.5, 0.1), 1.2}, {Vec3(0.0, 0.3, -0.6), 0.4}};
  LemmaStudy s;
  s.steps = steps;
  for (const auto& [name, F] : lemma_test_functions()) {
    s.names.push_back(name);
    std::vector<sphere::SphereField> exact;
    double scale = 0.0;
    for (const auto& [z, r] : at) {
      exact.push_back(lifted::lifted_q_spherical(lifted::make_slice(F, z, r, grid), pot));
      for (double x : exact.back().values) scale = std::max(scale, std::abs(x));
    }
    std::vector<double> row;
    for (double step : steps) {
      double err = 0.0;
      for (std::size_t a = 0; a < at.size(); ++a)
        for (std::size_t k = 0; k < grid->size(); k += 7) {
          const auto [v, w] = lifted::from_zrs(at[a].first, at[a].second, grid->nodes()[k]);
          err = std::max(err, std::abs(lifted::lifted_q_fd(F, pot, v, w, step) - exact[a].values[k]));
        }
      row.push_back(err / scale);
    }
    s.errors.push_back(std::move(row));
  }
  return s;
}

inline lifted::TestMoment quartic_moment() {
  return {[](const Vec3& v) { return std::pow(v[0], 4); },
          [](const Vec3& v) { return Vec3(4.0 * std::pow(v[0], 3), 0.0, 0.0); },
          [](const Vec3& v) {
            Mat3 H = Mat3::Zero();
            H(0, 0) = 12.0 * v[0] * v[0];
            return H;
          }};
}

// The configured initial density at another resolution; file data cannot be
// resampled, so the bimodal benchmark stands in.
inline kinetic::Density density_at(const config::RunConfig& cfg, int n) {
  const kinetic::VelocityGrid g(n, cfg.solver.half_width);
  const auto& init = cfg.init;
  switch (init.kind) {
    case config::InitKind::maxwellian: return kinetic::maxwellian(g, init.mass, init.mean, init.temperature);
    case config::InitKind::bimodal: return kinetic::bimodal(g, init.mass, init.offset, init.temperature);
    case config::InitKind::file: break;
  }
  return kinetic::bimodal(g);
}

inline lifted::ZRQuadrature decomposition_quadrature(const config::RunConfig& cfg) {
  const double l = cfg.solver.half_width;
  return lifted::ZRQuadrature(cfg.lifted.z_nodes, l, cfg.lifted.r_nodes, l, cfg.lifted.bandlimit);
}

inline lifted::ZRQuadrature layer_quadrature(const config::RunConfig& cfg) {
  const double l = cfg.solver.half_width;
  return lifted::ZRQuadrature(cfg.lifted.z_nodes, l, cfg.lifted.r_nodes, l, cfg.lifted.layer_bandlimit);
}

inline void sort_by_name(std::vector<Verdict>& vs) {
  std::sort(vs.begin(), vs.end(), [](const Verdict& a, const Verdict& b) { return a.name < b.name; });
}

inline std::vector<Verdict> verify_lifted(const config::RunConfig& cfg) {
  const Potential pot = cfg.solver.potential();
  std::vector<Verdict> out;

  const LemmaStudy lemma = lemma_study(pot);
  out.push_back(make_verdict("lemma_equivalence", lemma.finest_error(), 0.0, 1e-3));
  out.push_back(make_verdict("lemma_order", lemma.worst_order_gap(), 0.0, 0.4));

  // First-order contact of the lifted flow with the integral form of q.
  const kinetic::Density f = config::initial_density(cfg);
  const lifted::ContactPair c =
      lifted::first_order_contact(lifted::Interpolant(f), pot, decomposition_quadrature(cfg), quartic_moment());
  out.push_back(make_verdict("marginal_contact", std::abs(c.lifted - c.marginal) / std::max(std::abs(c.marginal), c.scale),
                             0.0, 0.02));

  // Relative L1 distance to the divergence-form operator, which carries the
  // O(h^2) error of both discretizations; its observed order is checked.
  std::vector<report::ConvergencePoint> pts;
  for (int n : {16, 24, 32}) {
    const kinetic::Density fn = density_at(cfg, n);
    pts.push_back({n, fn.grid.h(), lifted::marginal_defect(fn, pot)});
  }
  const report::ConvergenceTable t = report::convergence_table(pts);
  out.push_back(make_verdict("marginal_defect_order", 2.0 - t.order, 0.0, 0.4));

  sort_by_name(out);
  return out;
}

// d/dt i(f) at t = 0 from two steps of the solver, second order in dt.
inline double fisher_rate_from_steps(const kinetic::Density& f, const Potential& pot) {
  kinetic::ConvolutionEngine engine(f.grid, pot);
  const auto c = kinetic::compute_coefficients(f, engine);
  const double dt = 0.25 * kinetic::stable_dt(f, c, kinetic::Scheme::fct);
  const kinetic::Density f1 = kinetic::step(f, c, engine, dt, kinetic::Scheme::fct).f;
  const kinetic::Density f2 = kinetic::step(f1, engine, dt).f;
  return (-3.0 * kinetic::fisher_3d(f) + 4.0 * kinetic::fisher_3d(f1) - kinetic::fisher_3d(f2)) / (2.0 * dt);
}

struct SubadditivityStudy {
  double min_gap = INFINITY;
  double correlated_gap = 0.0;  // rho = 0.5
};

inline SubadditivityStudy subadditivity_study(std::uint64_t seed, int mixtures = 4) {
  SubadditivityStudy s;
  const lifted::ProductRule rule;
  auto consider = [&](const lifted::SixDensity& F) {
    const double g = lifted::subadditivity_gap(F, rule);
    s.min_gap = std::min(s.min_gap, g);
    return g;
  };
  consider(lifted::correlated_gaussian(0.0));
  s.correlated_gap = consider(lifted::correlated_gaussian(0.5));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), wt(0.3, 1.0);
  for (int trial = 0; trial < mixtures; ++trial) {
    std::vector<lifted::GaussianComponent> parts;
    for (int c = 0; c < 2; ++c) {
      lifted::Mat6 A;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) A(i, j) = 0.3 * u(rng);
      lifted::Vec6 mean;
      for (int i = 0; i < 6; ++i) mean[i] = 0.8 * u(rng);
      parts.push_back({wt(rng), mean, A * A.transpose() + lifted::Mat6::Identity()});
    }
    consider(lifted::gaussian_mixture(parts));
  }
  return s;
}

inline std::vector<Verdict> verify_fisher(const config::RunConfig& cfg) {
  const Potential pot = cfg.solver.potential();
  const kinetic::Density f = config::initial_density(cfg);
  const lifted::Interpolant fi(f);
  std::vector<Verdict> out;

  const lifted::FisherDecomposition d = lifted::fisher_decompose(fi, decomposition_quadrature(cfg));
  out.push_back(make_verdict("decomposition_identity", d.identity_defect(), 0.0, 0.02));

  const SubadditivityStudy sub = subadditivity_study(cfg.lifted.seed);
  out.push_back(make_verdict("subadditivity_min_gap", -sub.min_gap, 0.0, 1e-6));
  out.push_back(make_verdict("subadditivity_correlated", std::abs(sub.correlated_gap - 2.0) / 2.0, 0.0, 0.02));

  const lifted::LayerDerivatives L = lifted::layer_derivatives(fi, pot, layer_quadrature(cfg), cfg.lifted.dt_probe);
  const double scale = std::abs(L.d_par) + std::abs(L.d_sph) + std::abs(L.d_rad);
  out.push_back(make_verdict("layer_d_par", L.d_par, 0.0, 1e-6 * scale));
  out.push_back(make_verdict("layer_d_sph", std::abs(L.d_sph + 2.0 * L.gamma2_term) / std::abs(2.0 * L.gamma2_term), 0.0, 0.05));
  out.push_back(make_verdict("layer_d_rad", L.d_rad, L.radial_term, 0.05 * L.radial_term + 1e-6 * scale));
  out.push_back(make_verdict("layer_d_rad_factor_two", L.d_rad, 2.0 * L.radial_term, 0.05 * L.radial_term + 1e-6 * scale));

  // Lifting gives 2 di/dt <= dI/dt with I = (kappa/2)(I_par + I_sph + I_rad).
  const double rate = fisher_rate_from_steps(f, pot);
  const double excess = L.gamma2_term - L.radial_term;
  const double weak = -(lifted::kappa / 4.0) * excess * 1.1;
  const double strong = -(lifted::kappa / 2.0) * excess;
  out.push_back(make_verdict("theorem_bound", rate, weak, 1e-6 * std::abs(weak)));
  out.push_back(make_verdict("theorem_bound_factor_two", rate, strong, 0.1 * std::abs(strong)));

  sort_by_name(out);
  return out;
}

inline nlohmann::ordered_json to_json(const std::vector<Verdict>& checks) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Verdict& v : checks)
    arr.push_back({{"check", v.name}, {"value", v.observed}, {"bound", v.bound}, {"tolerance", v.tolerance}, {"pass", v.pass}});
  return arr;
}

}  // namespace landau::verify
