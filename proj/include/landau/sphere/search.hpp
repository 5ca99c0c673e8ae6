#pragma once

#include "landau/sphere/calculus.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <limits>
#include <random>

namespace landau::sphere {

// Limited-memory BFGS with Armijo backtracking.
struct LbfgsOptions {
  int max_iterations = 300;
  int memory = 10;
  double gradient_tolerance = 1e-9;
  double stall_tolerance = 1e-13;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <class Objective>
LbfgsResult lbfgs_minimize(Objective&& fg, Eigen::VectorXd x, const LbfgsOptions& opt) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd g(n);
  double fx = fg(x, g);
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;
  LbfgsResult res{x, fx, 0, false};
  int stall = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      alpha[k] = rho[k] * S[k].dot(q);
      q -= alpha[k] * Y[k];
    }
    double gamma = 1.0;
    if (!S.empty()) gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
    else gamma = 0.1 / std::max(1e-12, g.norm());
    Eigen::VectorXd d = gamma * q;
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta = rho[k] * Y[k].dot(d);
      d += (alpha[k] - beta) * S[k];
    }
    d = -d;
    double slope = g.dot(d);
    if (slope >= 0.0) {
      d = -g * (0.1 / std::max(1e-12, g.norm()));
      slope = g.dot(d);
      S.clear();
      Y.clear();
      rho.clear();
    }
    double step = 1.0;
    Eigen::VectorXd xn(n), gn(n);
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      xn = x + step * d;
      fn = fg(xn, gn);
      if (std::isfinite(fn) && fn <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    const double improvement = fx - fn;
    x = xn;
    g = gn;
    fx = fn;
    stall = (improvement <= opt.stall_tolerance * std::max(1.0, std::abs(fx))) ? stall + 1 : 0;
    if (stall >= 5) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  res.value = fx;
  return res;
}

// Real orthonormal harmonics used as coordinates for g = ln f.
struct RealHarmonic {
  int l;
  int m;  // m > 0: sqrt2 Re Y_lm, m < 0: sqrt2 Im Y_l|m|, m = 0: Y_l0
};

inline std::vector<RealHarmonic> real_basis(int L, bool even_only) {
  std::vector<RealHarmonic> out;
  for (int l = 1; l <= L; ++l) {
    if (even_only && l % 2 != 0) continue;
    for (int m = -l; m <= l; ++m) out.push_back({l, m});
  }
  return out;
}

inline Spectrum spectrum_from_real(const std::vector<RealHarmonic>& basis, const Eigen::VectorXd& c, int L) {
  Spectrum s(L);
  const double r2 = 1.0 / std::sqrt(2.0);
  for (std::size_t p = 0; p < basis.size(); ++p) {
    const auto [l, m] = basis[p];
    if (m == 0)
      s.set_real(l, 0, {c[p], 0.0});
    else if (m > 0)
      s.set_real(l, m, s.real_part_coefficient(l, m) + std::complex<double>(c[p] * r2, 0.0));
    else
      s.set_real(l, -m, s.real_part_coefficient(l, -m) + std::complex<double>(0.0, -c[p] * r2));
  }
  return s;
}

// Bakry-Emery ratio of exp(g) as a smooth function of the real coordinates of g,
// with its exact gradient. Basis jets are tabulated once on the evaluation grid.
class RatioObjective {
 public:
  RatioObjective(std::vector<RealHarmonic> basis, int L, GridPtr eval) : basis_(std::move(basis)), L_(L), eval_(std::move(eval)) {
    const auto n = static_cast<Eigen::Index>(eval_->size());
    const auto P = static_cast<Eigen::Index>(basis_.size());
    for (auto* M : {&v_, &t_, &p_, &tt_, &tp_, &pp_}) M->resize(n, P);
    for (Eigen::Index q = 0; q < P; ++q) {
      Eigen::VectorXd unit = Eigen::VectorXd::Zero(P);
      unit[q] = 1.0;
      const Jet J = jet(spectrum_from_real(basis_, unit, L_), *eval_);
      for (Eigen::Index k = 0; k < n; ++k) {
        v_(k, q) = J.value[k];
        t_(k, q) = J.d_theta[k];
        p_(k, q) = J.d_phi[k];
        tt_(k, q) = J.h_tt[k];
        tp_(k, q) = J.h_tp[k];
        pp_(k, q) = J.h_pp[k];
      }
    }
    w_ = Eigen::Map<const Eigen::VectorXd>(eval_->weights().data(), n);
  }

  [[nodiscard]] std::size_t dimension() const { return basis_.size(); }
  [[nodiscard]] const std::vector<RealHarmonic>& basis() const { return basis_; }

  // Returns the ratio (infinity for a numerically constant field).
  double operator()(const Eigen::VectorXd& c, Eigen::VectorXd& grad) const {
    const Eigen::VectorXd g = v_ * c, gt = t_ * c, gp = p_ * c, htt = tt_ * c, htp = tp_ * c, hpp = pp_ * c;
    const double gmax = g.maxCoeff();
    const Eigen::ArrayXd e = w_.array() * (g.array() - gmax).exp();
    const Eigen::ArrayXd grad2 = gt.array().square() + gp.array().square();
    const Eigen::ArrayXd hess2 = htt.array().square() + 2.0 * htp.array().square() + hpp.array().square();
    const double mass = e.sum();
    const double N = (e * (hess2 + grad2)).sum();
    const double D = (e * grad2).sum();
    if (!(D > 1e-12 * mass)) {
      grad.setZero(c.size());
      return std::numeric_limits<double>::infinity();
    }
    const double R = N / D;
    // d(N - R D) / dc, then divide by D.
    const Eigen::ArrayXd wv = e * (hess2 + grad2 - R * grad2);
    const Eigen::ArrayXd wt = 2.0 * e * gt.array() * (1.0 - R);
    const Eigen::ArrayXd wp = 2.0 * e * gp.array() * (1.0 - R);
    grad = (v_.transpose() * wv.matrix() + t_.transpose() * wt.matrix() + p_.transpose() * wp.matrix() +
            tt_.transpose() * (2.0 * e * htt.array()).matrix() + tp_.transpose() * (4.0 * e * htp.array()).matrix() +
            pp_.transpose() * (2.0 * e * hpp.array()).matrix()) /
           D;
    return R;
  }

 private:
  std::vector<RealHarmonic> basis_;
  int L_;
  GridPtr eval_;
  Eigen::MatrixXd v_, t_, p_, tt_, tp_, pp_;
  Eigen::VectorXd w_;
};

struct SearchOptions {
  int bandlimit = 10;
  bool even_only = true;
  int iterations = 1000;
  int restarts = 8;
  std::uint64_t seed = 0;
  int oversample = 3;       // evaluation grid bandlimit = oversample * bandlimit
  double amplitude = 1.5;   // typical starting norm of g
};

struct SearchResult {
  Spectrum log_coeffs;          // g with f = exp(g)
  double ratio = 0.0;           // on the search grid
  double ratio_refined = 0.0;   // same field on a grid twice as fine
  std::vector<double> start_ratios;
  int iterations = 0;
  bool converged = false;
  int best_start = -1;
};

inline SearchResult be_search(const SearchOptions& opt) {
  if (opt.bandlimit < 2) throw ConfigError("search bandlimit must be >= 2");
  if (opt.restarts < 1 || opt.iterations < 1) throw ConfigError("search needs restarts >= 1 and iterations >= 1");
  const auto basis = real_basis(opt.bandlimit, opt.even_only);
  const GridPtr eval = build_grid(std::max(opt.oversample, 1) * opt.bandlimit);
  const RatioObjective objective(basis, opt.bandlimit, eval);
  const auto P = static_cast<Eigen::Index>(objective.dimension());

  std::vector<LbfgsResult> runs(opt.restarts);
  parallel_for(static_cast<std::size_t>(opt.restarts), [&](std::size_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed & 0xffffffffu), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> log_scale(std::log(0.02), 0.0);
    Eigen::VectorXd c(P);
    for (Eigen::Index q = 0; q < P; ++q) c[q] = normal(rng);
    c *= opt.amplitude * std::exp(log_scale(rng)) / std::max(1e-300, c.norm());
    LbfgsOptions lo;
    lo.max_iterations = opt.iterations;
    runs[k] = lbfgs_minimize([&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { return objective(x, g); }, c, lo);
  });

  SearchResult out;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.restarts; ++k) {
    out.start_ratios.push_back(runs[k].value);
    out.iterations += runs[k].iterations;
    if (runs[k].value < best) {
      best = runs[k].value;
      out.best_start = k;
    }
  }
  if (out.best_start < 0) throw NumericalError("Bakry-Emery search found no finite ratio");
  const LbfgsResult& win = runs[out.best_start];
  out.converged = win.converged;
  out.ratio = win.value;
  out.log_coeffs = spectrum_from_real(basis, win.x, opt.bandlimit);
  const GridPtr fine = build_grid(2 * eval->bandlimit());
  out.ratio_refined = be_ratio_of_log(out.log_coeffs, *fine);
  if (!win.converged)
    warn("Bakry-Emery search stopped at the iteration cap; reporting best-so-far");
  if (std::abs(out.ratio_refined - out.ratio) > 1e-6 * std::abs(out.ratio))
    warn("Bakry-Emery ratio moved under grid refinement; the evaluation grid is under-resolved");
  return out;
}

}  // namespace landau::sphere
