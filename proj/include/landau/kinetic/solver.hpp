#pragma once

#include "landau/kinetic/diagnostics.hpp"
#include "landau/kinetic/operator.hpp"

#include <functional>
#include <optional>

namespace landau::kinetic {

// fct: Heun RK2 on the conservative form with a flux-corrected positivity
// limiter. central: the same time stepping on the unlimited central fluxes.
enum class Scheme { fct, central };

inline constexpr double stability_constant = 0.25;   // dt <= C h^2 / max rho(a_bar)
inline constexpr double positivity_fraction = 0.9;   // dt <= 0.9 / max outgoing low-order rate

struct StabilityError : ConfigError {
  double suggested_dt;
  StabilityError(const std::string& msg, double suggested) : ConfigError(msg), suggested_dt(suggested) {}
};

struct NumericalAbort : NumericalError {
  Density last_good;
  double t;
  NumericalAbort(const std::string& msg, Density f, double time)
      : NumericalError(msg), last_good(std::move(f)), t(time) {}
};

// Low-order and central fluxes on every face. The low-order flux treats the
// diagonal diffusion and the drift -b_bar with the hybrid central/upwind
// two-point scheme, which is monotone for any Peclet number; the cross
// diffusion lives only in the antidiffusive correction.
struct FaceFluxes {
  std::array<std::vector<double>, 3> low, high;
  std::vector<double> out_rate;  // outgoing coefficient of the low-order scheme per cell
};

inline FaceFluxes face_fluxes(const Density& f, const CoefficientField& c) {
  const VelocityGrid& g = f.grid;
  const int n = g.n();
  const double h = g.h();
  FaceFluxes out;
  out.high = central_fluxes(f, c);
  out.out_rate.assign(g.size(), 0.0);
  for (int ax = 0; ax < 3; ++ax) {
    out.low[ax].assign(g.size(), 0.0);
    const std::size_t st = g.stride(ax);
    const auto& aii = c.a_of(ax, ax);
    for (std::size_t i0 = 0; i0 < g.size(); ++i0) {
      if (g.ijk(i0)[ax] == n - 1) continue;
      const std::size_t i1 = i0 + st;
      const double A = 0.5 * (aii[i0] + aii[i1]);
      const double vd = -0.5 * (c.b[ax][i0] + c.b[ax][i1]);
      double cp = 0.0, cm = 0.0;
      if (A > 0.0) {
        const double P = h * vd / A;
        cp = std::max({P, 1.0 + 0.5 * P, 0.0});
        cm = cp - P;
        out.low[ax][i0] = A / h * (cp * f.values[i1] - cm * f.values[i0]);
        out.out_rate[i0] += A / (h * h) * cm;
        out.out_rate[i1] += A / (h * h) * cp;
      } else {
        // Degenerate diffusion: plain upwinding of the drift.
        const double flux = vd > 0.0 ? vd * f.values[i1] : vd * f.values[i0];
        out.low[ax][i0] = flux;
        out.out_rate[i0] += std::max(-vd, 0.0) / h;
        out.out_rate[i1] += std::max(vd, 0.0) / h;
      }
    }
  }
  return out;
}

inline double stable_dt(const CoefficientField& c, const FaceFluxes* faces, Scheme scheme) {
  const double h = c.grid.h();
  const double rho = max_spectral_radius(c);
  double dt = rho > 0.0 ? stability_constant * h * h / rho : std::numeric_limits<double>::infinity();
  if (scheme == Scheme::fct && faces) {
    const double rate = *std::max_element(faces->out_rate.begin(), faces->out_rate.end());
    if (rate > 0.0) dt = std::min(dt, positivity_fraction / rate);
  }
  return dt;
}

inline double stable_dt(const Density& f, const CoefficientField& c, Scheme scheme) {
  if (scheme == Scheme::central) return stable_dt(c, nullptr, scheme);
  const FaceFluxes faces = face_fluxes(f, c);
  return stable_dt(c, &faces, scheme);
}

struct StageResult {
  std::vector<double> rate;  // df/dt used for this stage
  std::size_t limited_faces = 0;
};

inline StageResult fct_rate(const Density& f, const FaceFluxes& faces, double dt) {
  const VelocityGrid& g = f.grid;
  const double h = g.h();
  StageResult out;
  std::vector<double> qL = detail::divergence(g, faces.low);
  std::vector<double> neg(g.size(), 0.0);
  const int n = g.n();
  for (int ax = 0; ax < 3; ++ax) {
    const std::size_t st = g.stride(ax);
    for (std::size_t i0 = 0; i0 < g.size(); ++i0) {
      if (g.ijk(i0)[ax] == n - 1) continue;
      const double anti = faces.high[ax][i0] - faces.low[ax][i0];
      if (anti < 0.0) neg[i0] += anti / h * dt;
      else neg[i0 + st] -= anti / h * dt;
    }
  }
  std::vector<double> R(g.size(), 1.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    if (neg[i] < 0.0) R[i] = std::clamp((f.values[i] + dt * qL[i]) / -neg[i], 0.0, 1.0);
  std::array<std::vector<double>, 3> limited;
  for (int ax = 0; ax < 3; ++ax) {
    limited[ax].assign(g.size(), 0.0);
    const std::size_t st = g.stride(ax);
    for (std::size_t i0 = 0; i0 < g.size(); ++i0) {
      if (g.ijk(i0)[ax] == n - 1) continue;
      const double anti = faces.high[ax][i0] - faces.low[ax][i0];
      const double theta = anti < 0.0 ? R[i0] : R[i0 + st];
      if (theta < 1.0) ++out.limited_faces;
      limited[ax][i0] = faces.low[ax][i0] + theta * anti;
    }
  }
  out.rate = detail::divergence(g, limited);
  return out;
}

inline StageResult stage_rate(const Density& f, const CoefficientField& c, double dt, Scheme scheme,
                              const FaceFluxes* precomputed = nullptr) {
  if (scheme == Scheme::central) return {collision_div(f, c), 0};
  if (precomputed) return fct_rate(f, *precomputed, dt);
  return fct_rate(f, face_fluxes(f, c), dt);
}

struct StepResult {
  Density f;
  double clamped_mass = 0.0;  // mass removed by clamping negative undershoots
  std::size_t limited_faces = 0;
};

// One Heun step. `coeff` must belong to `f`; the caller may pass the bound it
// already evaluated.
inline StepResult step(const Density& f, const CoefficientField& coeff, ConvolutionEngine& engine, double dt,
                       Scheme scheme, std::optional<double> known_bound = std::nullopt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  std::optional<FaceFluxes> faces;
  if (scheme == Scheme::fct) faces = face_fluxes(f, coeff);
  const double bound = known_bound ? *known_bound : stable_dt(coeff, faces ? &*faces : nullptr, scheme);
  if (dt > bound * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(6);
    os << "time step " << dt << " exceeds the stability bound " << bound << "; use dt <= " << bound;
    throw StabilityError(os.str(), bound);
  }
  const std::size_t N = f.values.size();
  StageResult k1 = stage_rate(f, coeff, dt, scheme, faces ? &*faces : nullptr);
  Density mid(f.grid);
  for (std::size_t i = 0; i < N; ++i) mid.values[i] = f.values[i] + dt * k1.rate[i];
  const CoefficientField c2 = compute_coefficients(mid, engine);
  const StageResult k2 = stage_rate(mid, c2, dt, scheme);
  StepResult out{Density(f.grid), 0.0, k1.limited_faces + k2.limited_faces};
  CompensatedSum clamped;
  for (std::size_t i = 0; i < N; ++i) {
    double v = 0.5 * f.values[i] + 0.5 * (mid.values[i] + dt * k2.rate[i]);
    if (v < 0.0) {
      clamped.add(-v);
      v = 0.0;
    }
    out.f.values[i] = v;
  }
  out.clamped_mass = clamped.value() * f.grid.cell_volume();
  return out;
}

inline StepResult step(const Density& f, ConvolutionEngine& engine, double dt, Scheme scheme = Scheme::fct) {
  return step(f, compute_coefficients(f, engine), engine, dt, scheme);
}

struct SolverConfig {
  int n = 32;
  double half_width = 6.5;
  double gamma = -3.0;
  std::optional<double> coupling;
  std::optional<double> dt;  // absent: largest stable step
  double t_end = 1.0;
  int every = 1;             // record every this many steps
  bool snapshots = false;
  Scheme scheme = Scheme::fct;

  [[nodiscard]] Potential potential() const { return Potential(gamma, coupling); }
  [[nodiscard]] VelocityGrid grid() const { return VelocityGrid(n, half_width); }
};

struct RunResult {
  std::vector<MomentRecord> records;
  Density final_state;
  std::size_t steps = 0;
  std::size_t substeps = 0;
  double clamped_mass = 0.0;
  double max_step_clamp = 0.0;  // largest per-step clamped mass relative to M
};

using RecordObserver = std::function<void(const MomentRecord&, const Density&)>;

inline constexpr double clamp_budget = 1e-10;

inline void require_finite(const Density& next, const Density& last_good, double t) {
  for (double v : next.values)
    if (!std::isfinite(v)) throw NumericalAbort("non-finite value in density", last_good, t);
}

inline RunResult run(const SolverConfig& cfg, const Density& init, const RecordObserver& observe = {}) {
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) throw ConfigError("time.t_end must be >= 0");
  if (cfg.every < 1) throw ConfigError("output.every must be >= 1");
  if (cfg.dt && !(*cfg.dt > 0.0)) throw ConfigError("time.dt must be positive");
  if (!(init.grid == cfg.grid())) throw ConfigError("initial density does not match the configured grid");
  init.validate();
  const Potential pot = cfg.potential();
  ConvolutionEngine engine(init.grid, pot);

  RunResult res{{}, init, 0, 0, 0.0, 0.0};
  Density& f = res.final_state;
  const double M0 = init.mass();
  double t = 0.0;
  auto record = [&] {
    res.records.push_back(moments(f, t));
    if (observe) observe(res.records.back(), f);
  };
  record();

  const double t_eps = 1e-12 * std::max(1.0, cfg.t_end);
  bool first = true;
  while (t < cfg.t_end - t_eps) {
    const double macro = cfg.dt ? std::min(*cfg.dt, cfg.t_end - t) : cfg.t_end - t;
    double left = macro;
    while (left > t_eps) {
      const CoefficientField c = compute_coefficients(f, engine);
      std::optional<FaceFluxes> faces;
      if (cfg.scheme == Scheme::fct) faces = face_fluxes(f, c);
      const double bound = stable_dt(c, faces ? &*faces : nullptr, cfg.scheme);
      if (first && cfg.dt && *cfg.dt > bound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os.precision(6);
        os << "time.dt = " << *cfg.dt << " exceeds the stability bound " << bound << "; use dt <= " << bound;
        throw StabilityError(os.str(), bound);
      }
      first = false;
      // Equal sub-steps so no sliver is left at the end of a macro step.
      const double pieces = std::ceil(left / bound * (1.0 - 1e-12));
      const double d = left / std::max(1.0, pieces);
      StepResult s = step(f, c, engine, d, cfg.scheme, bound);
      require_finite(s.f, f, t);
      res.clamped_mass += s.clamped_mass;
      res.max_step_clamp = std::max(res.max_step_clamp, s.clamped_mass / M0);
      if (s.clamped_mass > clamp_budget * M0) {
        std::ostringstream os;
        os << "clamped mass " << s.clamped_mass << " at t = " << t << " exceeds " << clamp_budget << " M";
        warn(os.str());
      }
      f = std::move(s.f);
      t += d;
      left -= d;
      ++res.substeps;
      if (!cfg.dt) break;
    }
    if (cfg.dt) t = std::min(cfg.t_end, t);  // absorb rounding of the sub-steps
    ++res.steps;
    if (res.steps % static_cast<std::size_t>(cfg.every) == 0 || t >= cfg.t_end - t_eps) record();
  }
  return res;
}

}  // namespace landau::kinetic
