// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// and the tolerances pinned below. Exits 0 when every criterion passes, or,
// with --expect-fail, when exactly the listed criteria fail.
#include "landau/kinetic/solver.hpp"
#include "landau/sphere/search.hpp"
#include "landau/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <set>

using namespace landau;
namespace sph = landau::sphere;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. Even fields sit in [11/2 - 0.02, 5.80]; without evenness the l = 1
// direction brings the ratio down to 2.
Outcome bakry_emery_bracket() {
  sph::SearchOptions opt;
  opt.bandlimit = 10;
  opt.seed = 7;
  opt.even_only = true;
  const double even = sph::be_search(opt).ratio;
  opt.even_only = false;
  const double any = sph::be_search(opt).ratio;
  return {even >= 5.48 && even <= 5.80 && any <= 2.05,
          fmt("L=10 even ratio %.6f in [5.48, 5.80], unrestricted %.6f <= 2.05", even, any)};
}

// 2. For g = eps Y of degree l the integrated ratio tends to l(l+1), since
// int Gamma_2(g) = int (Lap g)^2 by Bochner: 6 for l = 2 and 2 for l = 1.
Outcome linearized_ratios() {
  const auto g = sph::build_grid(12);
  const double eps = 1e-3, pi = std::numbers::pi;
  const double r2 = sph::be_ratio(sph::sample(g, [&](const Vec3& s) {
    return std::exp(eps * std::sqrt(5.0 / (16.0 * pi)) * (3.0 * s.z() * s.z() - 1.0));
  }));
  const double r1 = sph::be_ratio(sph::sample(g, [&](const Vec3& s) { return std::exp(eps * std::sqrt(3.0 / (4.0 * pi)) * s.z()); }));
  return {std::abs(r2 - 6.0) <= 1e-3 && std::abs(r1 - 2.0) <= 1e-3,
          fmt("Y20 ratio %.7f (6 +- 1e-3), Y10 ratio %.7f (2 +- 1e-3)", r2, r1)};
}

// 3. Bochner on the unit sphere: int (Lap g)^2 = int |Hess g|^2 + int |grad g|^2.
Outcome bochner_identity() {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int L = 4 + trial % 13;
    const auto g = sph::build_grid(L);
    sph::Spectrum c(L);
    for (int l = 0; l <= L - 2; ++l)
      for (int m = 0; m <= l; ++m) c.set_real(l, m, {n(rng), m == 0 ? 0.0 : n(rng)});
    const sph::Jet J = sph::jet(c, *g);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t k = 0; k < g->size(); ++k) {
      lhs += g->weights()[k] * J.laplacian(k) * J.laplacian(k);
      rhs += g->weights()[k] * (J.hess_sq(k) + J.grad_sq(k));
    }
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  return {worst <= 1e-8, fmt("worst relative defect %.3e over 100 fields (<= 1e-8)", worst)};
}

// 4. Finite differences of Q(F) against alpha(r) times the sphere Laplacian.
Outcome lifted_lemma() {
  const verify::LemmaStudy s = verify::lemma_study(Potential(-3.0));
  const double finest = s.finest_error(), gap = s.worst_order_gap();
  return {finest <= 1e-3 && gap <= 0.4,
          fmt("%zu functions, %zu steps: finest %.3e (<= 1e-3), worst |order - 2| %.3f (<= 0.4)", s.errors.size(),
              s.steps.size(), finest, gap)};
}

// 5. i_total = (kappa/2)(i_par + i_sph + i_rad) at n = 32, with the defect
// shrinking from the coarse to the fine quadrature.
Outcome decomposition_identity() {
  const kinetic::VelocityGrid grid(32, 6.5);
  const lifted::ZRQuadrature coarse(10, 6.5, 8, 6.5, 6), fine(16, 6.5, 12, 6.5, 8);
  bool pass = true;
  std::string detail;
  for (const auto& [name, f] : {std::pair<std::string, kinetic::Density>{"gaussian", kinetic::maxwellian(grid, 1.0, Vec3::Zero(), 1.0)},
                                {"bimodal", kinetic::bimodal(grid)}}) {
    const lifted::Interpolant fi(f);
    const double dc = lifted::fisher_decompose(fi, coarse).identity_defect();
    const double df = lifted::fisher_decompose(fi, fine).identity_defect();
    pass = pass && df <= 0.02 && df <= dc;
    detail += fmt("%s defect %.2e -> %.2e; ", name.c_str(), dc, df);
  }
  return {pass, detail + "fine <= 0.02 and not above coarse"};
}

// 6. Subadditivity on product-rule test densities; closed form at rho = 1/2.
Outcome subadditivity() {
  const verify::SubadditivityStudy s = verify::subadditivity_study(0);
  const double want = 6.0 / (1.0 - 0.25) - 6.0;
  const double rel = std::abs(s.correlated_gap - want) / want;
  return {s.min_gap >= -1e-6 && rel <= 0.02,
          fmt("min gap %.3e (>= -1e-6), rho=0.5 gap %.5f vs %.1f (rel %.2e <= 0.02)", s.min_gap, s.correlated_gap, want, rel)};
}

// 7. Layer derivatives on the bimodal benchmark. The radial layer is held to
// radial_term itself; the factor-two margin is reported alongside.
Outcome layer_derivatives() {
  const kinetic::Density f = kinetic::bimodal(kinetic::VelocityGrid(32, 6.5));
  const lifted::Interpolant fi(f);
  const lifted::ZRQuadrature rule(16, 6.5, 12, 6.5, 24);
  const lifted::LayerDerivatives c = lifted::layer_derivatives(fi, Potential(-3.0), rule, 1e-5);
  const lifted::LayerDerivatives m = lifted::layer_derivatives(fi, Potential(0.0), rule, 1e-5);
  const double scale = std::abs(c.d_par) + std::abs(c.d_sph) + std::abs(c.d_rad);
  const double tol = 1e-6 * scale;
  const double sph_rel = std::abs(c.d_sph + 2.0 * c.gamma2_term) / (2.0 * c.gamma2_term);
  const double rad_tol = 0.05 * c.radial_term + tol;
  const bool par_ok = c.d_par <= tol;
  const bool sph_ok = sph_rel <= 0.05;
  const bool rad_ok = c.d_rad <= c.radial_term + rad_tol;
  const bool maxwell_ok = m.radial_term == 0.0;
  return {par_ok && sph_ok && rad_ok && maxwell_ok,
          fmt("gamma=-3: d_par %.3e (<= %.1e) %s; d_sph rel %.3f (<= 0.05) %s; d_rad %.5f vs radial_term %.5f + %.5f %s "
              "(ratio %.3f, d_rad <= 2 radial_term %s); gamma=0 radial_term %.1f %s",
              c.d_par, tol, par_ok ? "ok" : "x", sph_rel, sph_ok ? "ok" : "x", c.d_rad, c.radial_term, rad_tol,
              rad_ok ? "ok" : "x", c.d_rad / c.radial_term, c.d_rad <= 2.0 * c.radial_term + rad_tol ? "holds" : "fails",
              m.radial_term, maxwell_ok ? "ok" : "x")};
}

// 8. Bimodal runs at n = 32, recording every step; t_end is long enough for
// the entropy to drop by 5% of |H(0)|.
Outcome headline_monotonicity() {
  bool pass = true;
  std::string detail;
  for (const auto& [gamma, t_end] : std::vector<std::pair<double, double>>{{-3.0, 12.0}, {0.0, 0.015}, {-1.0, 0.06}, {-2.0, 0.25}}) {
    kinetic::SolverConfig cfg;
    cfg.gamma = gamma;
    cfg.t_end = t_end;
    const kinetic::RunResult r = kinetic::run(cfg, kinetic::bimodal(cfg.grid()));
    const auto vs = report::monotonicity_verdict(r.records);
    const double h0 = r.records.front().entropy;
    const double drop = (h0 - r.records.back().entropy) / std::abs(h0);
    double mass = 0.0, energy = 0.0;
    for (const auto& v : vs) {
      if (v.name == "mass_drift") mass = v.observed;
      if (v.name == "energy_drift") energy = v.observed;
    }
    const bool ok = report::all_pass(vs) && drop >= 0.05;
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += fmt("gamma=%g: %zu records, drop %.1f%%, mass %.1e, energy %.1e %s", gamma, r.records.size(), 100 * drop,
                  mass, energy, ok ? "ok" : "x");
  }
  return {pass, detail};
}

// 9. q(M) vanishes up to discretization error, and the Coulomb trace of the
// coefficient matrix returns f.
Outcome equilibrium() {
  auto residual = [](int n) {
    const kinetic::Density f = kinetic::maxwellian(kinetic::VelocityGrid(n, 6.5), 1.0, Vec3::Zero(), 1.0);
    const auto c = kinetic::compute_coefficients(f, Potential(-3.0));
    double q = 0.0, trace = 0.0, mass = 0.0;
    const auto div = kinetic::collision_div(f, c);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
      q += std::abs(div[i]);
      trace += std::abs(c.c[i] - f.values[i]);
      mass += f.values[i];
    }
    return std::pair{q * f.grid.cell_volume(), trace / mass};
  };
  const auto [q16, t16] = residual(16);
  const auto [q32, t32] = residual(32);
  const double ratio = q16 / q32;
  return {ratio >= 3.0 && ratio <= 5.5 && t32 <= 0.02,
          fmt("|q(M)|_1 %.3e -> %.3e (ratio %.2f in [3, 5.5]); c vs f L1 %.3e at n=32 (<= 0.02)", q16, q32, ratio, t32)};
}

// 10. Heat flow from variance s: i = 3/s and di/dt = -6/s^2.
Outcome heat_flow_fisher() {
  const double s0 = 1.0, dt = 1e-3;
  const kinetic::VelocityGrid g(32, 7.0);
  auto at = [&](double t) { return kinetic::maxwellian(g, 1.0, Vec3::Zero(), s0 + 2.0 * t); };
  const double rate = (kinetic::fisher_3d(at(dt)) - kinetic::fisher_3d(at(-dt))) / (2.0 * dt);
  const double want = -6.0 / (s0 * s0);
  const double rel = std::abs(rate - want) / std::abs(want);
  return {rel <= 0.01, fmt("di/dt %.6f vs %.1f (rel %.2e <= 0.01)", rate, want, rel)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only, expect_fail;
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--expect-fail", expect_fail, "criteria known to fail; exit 0 if exactly these fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, Outcome (*)()>> criteria = {
      {"bakry_emery_bracket", bakry_emery_bracket},
      {"linearized_ratios", linearized_ratios},
      {"bochner_identity", bochner_identity},
      {"lifted_lemma", lifted_lemma},
      {"decomposition_identity", decomposition_identity},
      {"subadditivity", subadditivity},
      {"layer_derivatives", layer_derivatives},
      {"headline_monotonicity", headline_monotonicity},
      {"equilibrium", equilibrium},
      {"heat_flow_fisher", heat_flow_fisher},
  };

  std::set<int> failed;
  for (int id = 1; id <= static_cast<int>(criteria.size()); ++id) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[id - 1].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) failed.insert(id);
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, criteria[id - 1].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }

  std::set<int> expected;
  for (int id : expect_fail)
    if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
  if (failed == expected) {
    if (!expected.empty()) std::printf("failures match the expected set\n");
    return 0;
  }
  std::printf("failures do not match the expected set\n");
  return 1;
}
