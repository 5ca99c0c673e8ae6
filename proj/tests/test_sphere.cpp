#include "landau/sphere/calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace landau;
using namespace landau::sphere;

namespace {

constexpr double pi = std::numbers::pi;

// Closed forms, written out independently of the recurrences.
double y20(const Vec3& s) { return std::sqrt(5.0 / (16.0 * pi)) * (3.0 * s.z() * s.z() - 1.0); }
double y10(const Vec3& s) { return std::sqrt(3.0 / (4.0 * pi)) * s.z(); }
double y11_real(const Vec3& s) { return std::sqrt(3.0 / (4.0 * pi)) * s.x(); }  // sqrt2 * Re(-Y_11)

Spectrum random_spectrum(int L, std::mt19937_64& rng, int max_degree) {
  std::normal_distribution<double> n(0.0, 1.0);
  Spectrum c(L);
  for (int l = 0; l <= max_degree; ++l)
    for (int m = 0; m <= l; ++m) c.set_real(l, m, {n(rng), m == 0 ? 0.0 : n(rng)});
  return c;
}

double integral_of(const GridPtr& g, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += g->weights()[k] * v[k];
  return s;
}

}  // namespace

TEST(SphereGrid, WeightsSumToSurfaceArea) {
  for (int L : {2, 8, 17, 32}) {
    auto g = build_grid(L);
    double s = 0.0;
    for (double w : g->weights()) s += w;
    EXPECT_NEAR(s / (4.0 * pi), 1.0, 1e-12) << L;
  }
}

TEST(SphereGrid, RejectsTinyBandlimit) { EXPECT_THROW(build_grid(1), ConfigError); }

TEST(SphereGrid, AntipodalNodesAreExactNegations) {
  auto g = build_grid(9);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const std::size_t a = g->antipode(k);
    EXPECT_EQ(g->antipode(a), k);
    EXPECT_EQ(g->nodes()[a], Vec3(-g->nodes()[k]));
    EXPECT_EQ(g->weights()[a], g->weights()[k]);
  }
}

TEST(SphereGrid, OrthonormalityOfHarmonics) {
  auto g = build_grid(8);
  auto grid = *g;
  // <Y_lm, Y_l'm'> computed by complex synthesis of each harmonic.
  auto complex_values = [&](int l, int m) {
    std::vector<std::complex<double>> v(grid.size());
    for (int i = 0; i < grid.rows(); ++i)
      for (int j = 0; j < grid.cols(); ++j) {
        const double p = grid.plm(i, l, std::abs(m)) * ((m < 0 && (m % 2)) ? -1.0 : 1.0);
        const double phi = 2.0 * pi * j / grid.cols();
        v[grid.index(i, j)] = p * std::exp(std::complex<double>(0.0, m * phi));
      }
    return v;
  };
  auto inner = [&](int l1, int m1, int l2, int m2) {
    auto a = complex_values(l1, m1), b = complex_values(l2, m2);
    std::complex<double> s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += grid.weights()[k] * a[k] * std::conj(b[k]);
    return s;
  };
  EXPECT_NEAR(std::abs(inner(4, 2, 4, 2) - 1.0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(inner(3, 1, 5, 1)), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(inner(8, -7, 8, -7) - 1.0), 0.0, 1e-10);
  EXPECT_NEAR(std::abs(inner(2, 0, 6, 0)), 0.0, 1e-10);
}

TEST(SphereTransform, Y20AnalyzesToSingleCoefficient) {
  auto g = build_grid(8);
  const Spectrum c = analyze(sample(g, y20));
  for (int l = 0; l <= 8; ++l)
    for (int m = -l; m <= l; ++m) {
      const double expect = (l == 2 && m == 0) ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(c(l, m) - expect), 0.0, 1e-12) << l << ' ' << m;
    }
}

TEST(SphereTransform, ConditionShortleyPhaseMatchesCartesianForm) {
  auto g = build_grid(6);
  const Spectrum c = analyze(sample(g, y11_real));
  // x = -sqrt(2pi/3)(Y_11 - Y_1,-1) * ... so c_11 = -1/sqrt2 and c_1,-1 = +1/sqrt2.
  EXPECT_NEAR(c(1, 1).real(), -1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(c(1, -1).real(), 1.0 / std::sqrt(2.0), 1e-12);
}

TEST(SphereTransform, RoundTripAndParseval) {
  std::mt19937_64 rng(11);
  for (int L : {4, 9, 16}) {
    auto g = build_grid(L);
    const Spectrum c = random_spectrum(L, rng, L);
    const SphereField f = synthesize(c, g);
    const Spectrum back = analyze(f);
    double err = 0.0, norm2 = 0.0;
    for (std::size_t k = 0; k < c.data().size(); ++k) {
      err = std::max(err, std::abs(back.data()[k] - c.data()[k]));
      norm2 += std::norm(c.data()[k]);
    }
    EXPECT_LT(err, 1e-11);
    std::vector<double> sq(f.values.size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = f.values[k] * f.values[k];
    EXPECT_NEAR(integral_of(g, sq) / norm2, 1.0, 1e-10);
    const SphereField again = synthesize(back, g);
    for (std::size_t k = 0; k < f.values.size(); ++k) EXPECT_NEAR(again.values[k], f.values[k], 1e-10);
  }
}

TEST(SphereTransform, ContentAboveBandlimitIsReportedAsAliasing) {
  auto g = build_grid(6);
  std::string captured;
  auto saved = warning_sink();
  warning_sink() = [&](const std::string& m) { captured = m; };
  // Degree 9 content: z^9.
  const auto rep = analyze_checked(sample(g, [](const Vec3& s) { return std::pow(s.z(), 9) + 1.0; }));
  warning_sink() = saved;
  EXPECT_TRUE(rep.aliased);
  EXPECT_NE(captured.find("aliased"), std::string::npos);
  const auto clean = analyze_checked(sample(g, y20));
  EXPECT_FALSE(clean.aliased);
}

TEST(SphereTransform, SpectrumLargerThanGridIsRejected) {
  auto g = build_grid(4);
  EXPECT_THROW(synthesize(Spectrum(6), g), DomainError);
}

TEST(LaplaceBeltrami, Eigenvalues) {
  auto g = build_grid(8);
  const SphereField lap = laplace_beltrami(sample(g, y20));
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(lap.values[k], -6.0 * y20(g->nodes()[k]), 1e-12);
  const SphereField zero = laplace_beltrami(sample(g, [](const Vec3&) { return 3.0; }));
  for (double v : zero.values) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(LaplaceBeltrami, IntegratesToZero) {
  std::mt19937_64 rng(3);
  auto g = build_grid(12);
  const SphereField f = synthesize(random_spectrum(12, rng, 12), g);
  EXPECT_NEAR(integrate(laplace_beltrami(f)), 0.0, 1e-10);
}

TEST(LaplaceBeltrami, MatchesTraceOfHessianAndAmbientFormula) {
  // For an ambient function Phi restricted to the sphere:
  // Delta_S Phi = Delta Phi - sigma^T D^2 Phi sigma - 2 sigma . grad Phi.
  auto g = build_grid(10);
  auto phi = [](const Vec3& s) { return s.x() * s.x() * s.y() + 0.5 * s.z() * s.z() * s.z() - s.x() * s.z(); };
  const SphereField f = sample(g, phi);
  const SphereField lap = laplace_beltrami(f);
  const Jet J = jet(analyze(f), *g);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const Vec3 s = g->nodes()[k];
    const double x = s.x(), y = s.y(), z = s.z();
    const Vec3 grad(2 * x * y - z, x * x, 1.5 * z * z - x);
    Mat3 H;
    H << 2 * y, 2 * x, -1, 2 * x, 0, 0, -1, 0, 3 * z;
    const double expect = H.trace() - s.dot(H * s) - 2.0 * s.dot(grad);
    EXPECT_NEAR(lap.values[k], expect, 1e-11);
    EXPECT_NEAR(J.laplacian(k), expect, 1e-10);
  }
}

TEST(Calculus, GradientAndHessianAreTangent) {
  std::mt19937_64 rng(5);
  auto g = build_grid(10);
  const SphereField f = synthesize(random_spectrum(10, rng, 10), g);
  const auto grad = gradient(f);
  const auto hess = hessian(f);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const Vec3 s = g->nodes()[k];
    EXPECT_LE(std::abs(s.dot(grad[k])), 1e-10);
    EXPECT_LE((hess[k] * s).norm(), 1e-10);
    EXPECT_LE((hess[k] - hess[k].transpose()).norm(), 1e-12);
  }
}

TEST(Calculus, ConstantFieldHasNoDerivatives) {
  auto g = build_grid(6);
  const SphereField f = sample(g, [](const Vec3&) { return 2.5; });
  for (const Vec3& v : gradient(f)) EXPECT_LE(v.norm(), 1e-12);
  for (const Mat3& m : hessian(f)) EXPECT_LE(m.norm(), 1e-12);
}

TEST(Calculus, GradientMatchesAmbientProjection) {
  auto g = build_grid(8);
  auto phi = [](const Vec3& s) { return s.x() * s.y() + s.z(); };
  const auto grad = gradient(sample(g, phi));
  for (std::size_t k = 0; k < g->size(); ++k) {
    const Vec3 s = g->nodes()[k];
    const Vec3 ambient(s.y(), s.x(), 1.0);
    const Vec3 tangential = ambient - s.dot(ambient) * s;
    EXPECT_LE((grad[k] - tangential).norm(), 1e-11);
  }
}

TEST(Calculus, DirichletEnergyOfY10) {
  auto g = build_grid(8);
  const auto grad = gradient(sample(g, y10));
  std::vector<double> e(grad.size());
  for (std::size_t k = 0; k < e.size(); ++k) e[k] = grad[k].squaredNorm();
  EXPECT_NEAR(integral_of(g, e), 2.0, 1e-12);
}

TEST(Calculus, BochnerIdentityOnRandomFields) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const int L = 6 + trial % 9;
    auto g = build_grid(L);
    const Jet J = jet(random_spectrum(L, rng, L - 2), *g);
    std::vector<double> lap2(g->size()), hess2(g->size()), grad2(g->size());
    for (std::size_t k = 0; k < g->size(); ++k) {
      lap2[k] = J.laplacian(k) * J.laplacian(k);
      hess2[k] = J.hess_sq(k);
      grad2[k] = J.grad_sq(k);
    }
    const double lhs = integral_of(g, lap2), rhs = integral_of(g, hess2) + integral_of(g, grad2);
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-8) << "L=" << L;
  }
}

TEST(HeatFlow, DecaysEachDegree) {
  auto g = build_grid(8);
  auto y30 = [](const Vec3& s) {
    return std::sqrt(7.0 / (16.0 * pi)) * (5.0 * std::pow(s.z(), 3) - 3.0 * s.z());
  };
  const SphereField f = sample(g, [&](const Vec3& s) { return 1.0 + 0.1 * y30(s); });
  const SphereField u = heat_flow(f, 1.0, 0.05);
  for (std::size_t k = 0; k < g->size(); ++k)
    EXPECT_NEAR(u.values[k], 1.0 + 0.1 * std::exp(-0.6) * y30(g->nodes()[k]), 1e-12);
  const SphereField same = heat_flow(f, 1.0, 0.0);
  for (std::size_t k = 0; k < g->size(); ++k) EXPECT_NEAR(same.values[k], f.values[k], 1e-12);
}

TEST(HeatFlow, SemigroupMassAndBackwardGate) {
  std::mt19937_64 rng(8);
  auto g = build_grid(10);
  const Spectrum c = random_spectrum(10, rng, 10);
  const Spectrum a = heat_flow(heat_flow(c, 0.7, 0.03), 0.7, 0.05);
  const Spectrum b = heat_flow(c, 0.7, 0.08);
  for (std::size_t k = 0; k < a.data().size(); ++k) EXPECT_NEAR(std::abs(a.data()[k] - b.data()[k]), 0.0, 1e-14);
  const SphereField f = synthesize(c, g);
  EXPECT_NEAR(integrate(heat_flow(f, 2.0, 0.3)), integrate(f), 1e-12);
  EXPECT_THROW(heat_flow(c, 1.0, -0.1), DomainError);
  EXPECT_NO_THROW(heat_flow(c, 1.0, -0.1, true));
}

TEST(HeatFlow, PreservesPositivity) {
  auto g = build_grid(12);
  const SphereField f = sample(g, [](const Vec3& s) { return std::exp(2.0 * s.x() * s.y() - s.z()); });
  for (double t : {0.01, 0.1, 1.0}) {
    const SphereField u = heat_flow(f, 1.0, t);
    EXPECT_TRUE(u.is_positive()) << t;
  }
}

TEST(Gamma2, ConstantFieldGivesZero) {
  auto g = build_grid(6);
  const SphereField f = sample(g, [](const Vec3&) { return 1.7; });
  EXPECT_NEAR(gamma2_functional(f), 0.0, 1e-14);
  EXPECT_NEAR(sph_fisher(f), 0.0, 1e-14);
  EXPECT_THROW(be_ratio(f), DomainError);
}

TEST(Gamma2, RejectsNonpositiveField) {
  auto g = build_grid(6);
  const SphereField f = sample(g, y20);
  EXPECT_THROW(gamma2_functional(f), PositivityError);
}

TEST(Gamma2, LinearizedRatios) {
  auto g = build_grid(12);
  const double eps = 1e-3;
  EXPECT_NEAR(be_ratio(sample(g, [&](const Vec3& s) { return std::exp(eps * y20(s)); })), 6.0, 1e-3);
  EXPECT_NEAR(be_ratio(sample(g, [&](const Vec3& s) { return std::exp(eps * y10(s)); })), 2.0, 1e-3);
}

TEST(Gamma2, FisherOfTiltedField) {
  auto g = build_grid(12);
  for (double eps : {1e-2, 1e-3}) {
    const double v = sph_fisher(sample(g, [&](const Vec3& s) { return std::exp(eps * y11_real(s)); }));
    EXPECT_NEAR(v / (2.0 * eps * eps), 1.0, 5.0 * eps * eps + 1e-9);
  }
}

TEST(Gamma2, HomogeneityAndRotationInvariance) {
  auto g = build_grid(12);
  auto f = [](const Vec3& s) { return std::exp(0.8 * s.x() * s.x() - 0.3 * s.y() * s.z()); };
  const SphereField a = sample(g, f);
  SphereField b = a;
  for (double& v : b.values) v *= 3.5;
  EXPECT_NEAR(sph_fisher(b), 3.5 * sph_fisher(a), 1e-12 * sph_fisher(b));
  EXPECT_NEAR(be_ratio(b), be_ratio(a), 1e-11);
  const Mat3 R = Eigen::AngleAxisd(0.7, Vec3(1, 2, -0.5).normalized()).toRotationMatrix();
  const SphereField rotated = sample(g, [&](const Vec3& s) { return f(R * s); });
  EXPECT_NEAR(be_ratio(rotated), be_ratio(a), 1e-8);
}

TEST(Gamma2, JetIntegralsAgreeWithLogForm) {
  auto g = build_grid(24);
  auto f = [](const Vec3& s) { return 1.0 + 0.4 * s.x() * s.y() + 0.2 * s.z() * s.z() * s.z(); };
  const SphereField F = sample(g, f);
  const auto parts = gamma2_parts(F);
  const JetIntegrals ji = jet_integrals(jet(analyze(F), *g), *g, 0.0);
  EXPECT_NEAR(ji.fisher / parts.fisher, 1.0, 1e-8);
  EXPECT_NEAR(ji.gamma2 / parts.gamma2, 1.0, 1e-6);
}

TEST(Gamma2, RatioAtLeastOneAndEvenRatioAboveElevenHalves) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 1.0);
  auto eval = build_grid(30);
  for (int trial = 0; trial < 40; ++trial) {
    Spectrum c(10);
    const bool even = trial % 2 == 0;
    const double amp = 0.2 + 0.1 * (trial % 15);
    for (int l = 1; l <= 10; ++l) {
      if (even && l % 2) continue;
      for (int m = 0; m <= l; ++m) c.set_real(l, m, {amp * n(rng) / l, m ? amp * n(rng) / l : 0.0});
    }
    const double r = be_ratio_of_log(c, *eval);
    EXPECT_GE(r, 1.0);
    if (even) EXPECT_GE(r, 5.5 - 0.02);
  }
}

TEST(KL, SelfDivergenceIsZeroAndGibbs) {
  auto g = build_grid(12);
  auto F = sample(g, [](const Vec3& s) { return std::exp(s.x()); });
  EXPECT_NEAR(kl_divergence(F, F), 0.0, 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 a(n(rng), n(rng), n(rng));
    auto G = sample(g, [&](const Vec3& s) { return std::exp(a.dot(s)); });
    const double scale = integrate(F) / integrate(G);
    for (double& v : G.values) v *= scale;
    EXPECT_GE(kl_divergence(F, G), 0.0);
  }
}

TEST(KL, RejectsMassMismatch) {
  auto g = build_grid(6);
  auto F = sample(g, [](const Vec3&) { return 1.0; });
  auto G = sample(g, [](const Vec3&) { return 1.001; });
  EXPECT_THROW(kl_divergence(F, G), DomainError);
}

TEST(KL, QuadraticContactWithFisherAlongHeatFamily) {
  // KL(F, F_h) / h^2 -> (1/2) integral of (dF/dh)^2 / F with F_h the heat flow at time h.
  auto g = build_grid(16);
  const SphereField F = sample(g, [](const Vec3& s) { return std::exp(0.9 * s.x() * s.z() + 0.4 * s.y()); });
  const Spectrum c = analyze(F);
  const SphereField Fp = synthesize(c, g);
  const SphereField lap = laplace_beltrami(Fp);
  double target = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) target += g->weights()[k] * lap.values[k] * lap.values[k] / Fp.values[k];
  target *= 0.5;
  double prev_err = INFINITY;
  for (double h : {4e-3, 2e-3, 1e-3}) {
    const SphereField Fh = synthesize(heat_flow(c, 1.0, h), g);
    const double ratio = kl_divergence(Fp, Fh) / (h * h);
    const double err = std::abs(ratio - target) / target;
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 2e-2);
}

TEST(KL, DissipationUnderCommonHeatFlow) {
  auto g = build_grid(16);
  const SphereField F0 = synthesize(analyze(sample(g, [](const Vec3& s) { return std::exp(0.7 * s.x() - 0.5 * s.y() * s.z()); })), g);
  SphereField G0 = synthesize(analyze(sample(g, [](const Vec3& s) { return std::exp(0.3 * s.z() * s.z()); })), g);
  const double scale = integrate(F0) / integrate(G0);
  for (double& v : G0.values) v *= scale;
  const double alpha = 0.8, t = 0.1, dt = 1e-4;
  auto at = [&](const SphereField& X, double time) { return heat_flow(X, alpha, time); };
  const double kl_minus = kl_divergence(at(F0, t - dt), at(G0, t - dt));
  const double kl_plus = kl_divergence(at(F0, t + dt), at(G0, t + dt));
  const double measured = (kl_plus - kl_minus) / (2 * dt);
  const double predicted = -alpha * relative_fisher(at(F0, t), at(G0, t));
  EXPECT_LT(measured, 0.0);
  EXPECT_NEAR(measured / predicted, 1.0, 1e-4);
  double last = kl_divergence(F0, G0);
  for (double s : {0.05, 0.1, 0.2, 0.4}) {
    const double v = kl_divergence(at(F0, s), at(G0, s));
    EXPECT_LE(v, last);
    last = v;
  }
}
