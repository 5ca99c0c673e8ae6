#pragma once

#include "landau/kinetic/diagnostics.hpp"

#include <json.hpp>

#include <charconv>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace landau::report {

using kinetic::MomentRecord;

struct Verdict {
  std::string name;
  double observed = 0.0;
  double bound = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// pass <=> observed <= bound + tolerance. NaN fails.
inline Verdict make_verdict(std::string name, double observed, double bound, double tolerance) {
  const bool pass = observed <= bound + tolerance;
  return {std::move(name), observed, bound, tolerance, pass};
}

inline bool all_pass(const std::vector<Verdict>& vs) {
  return std::all_of(vs.begin(), vs.end(), [](const Verdict& v) { return v.pass; });
}

struct Tolerances {
  double entropy_abs = 1e-8;   // per pair
  double fisher_rel = 1e-6;    // per pair, relative to the earlier value
  double mass_rel = 1e-10;
  double momentum_rel = 1e-3;  // relative to sqrt(2 M E) of the first record
  double energy_rel = 1e-3;
};

// One entropy and one Fisher verdict per consecutive pair, then the drift of
// mass, momentum and energy (worst over the series, relative to the first record).
inline std::vector<Verdict> monotonicity_verdict(const std::vector<MomentRecord>& series, const Tolerances& tol = {}) {
  if (series.size() < 2) throw ConfigError("monotonicity verdicts need at least two records");
  for (std::size_t k = 1; k < series.size(); ++k)
    if (!(series[k].t > series[k - 1].t)) throw ConfigError("series is not sorted by strictly increasing t");
  std::vector<Verdict> out;
  for (std::size_t k = 1; k < series.size(); ++k) {
    const MomentRecord& a = series[k - 1];
    const MomentRecord& b = series[k];
    const std::string at = "[" + std::to_string(k) + "]";
    out.push_back(make_verdict("entropy" + at, b.entropy - a.entropy, 0.0, tol.entropy_abs));
    out.push_back(make_verdict("fisher" + at, b.fisher - a.fisher, 0.0, tol.fisher_rel * std::abs(a.fisher)));
  }
  const MomentRecord& first = series.front();
  const double p_scale = std::sqrt(2.0 * first.mass * first.energy);
  double dm = 0.0, dp = 0.0, de = 0.0;
  for (const MomentRecord& r : series) {
    dm = std::max(dm, std::abs(r.mass - first.mass) / first.mass);
    dp = std::max(dp, (r.momentum - first.momentum).norm() / p_scale);
    de = std::max(de, std::abs(r.energy - first.energy) / first.energy);
  }
  out.push_back(make_verdict("mass_drift", dm, 0.0, tol.mass_rel));
  out.push_back(make_verdict("momentum_drift", dp, 0.0, tol.momentum_rel));
  out.push_back(make_verdict("energy_drift", de, 0.0, tol.energy_rel));
  return out;
}

inline nlohmann::ordered_json to_json(const Verdict& v) {
  return {{"name", v.name}, {"observed", v.observed}, {"bound", v.bound}, {"tolerance", v.tolerance}, {"pass", v.pass}};
}

inline nlohmann::ordered_json to_json(const std::vector<Verdict>& vs) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Verdict& v : vs) arr.push_back(to_json(v));
  return arr;
}

// Time series CSV.

inline constexpr const char* csv_header = "t,mass,px,py,pz,energy,entropy,fisher";

inline void write_csv_row(std::ostream& os, const MomentRecord& r) {
  const double cols[] = {r.t, r.mass, r.momentum[0], r.momentum[1], r.momentum[2], r.energy, r.entropy, r.fisher};
  std::ostringstream line;
  line << std::setprecision(17);
  for (std::size_t c = 0; c < std::size(cols); ++c) line << (c ? "," : "") << cols[c];
  os << line.str() << '\n';
}

inline void write_csv(std::ostream& os, const std::vector<MomentRecord>& series) {
  os << csv_header << '\n';
  for (const MomentRecord& r : series) write_csv_row(os, r);
}

inline std::vector<MomentRecord> read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty series file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != csv_header) throw ConfigError("unexpected CSV header '" + line + "'; expected " + csv_header);
  std::vector<MomentRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 8> v{};
    const char* p = line.data();
    const char* end = p + line.size();
    for (std::size_t c = 0; c < v.size(); ++c) {
      const auto [next, ec] = std::from_chars(p, end, v[c]);
      const bool last = c + 1 == v.size();
      if (ec != std::errc() || (last ? next != end : (next == end || *next != ',')))
        throw ConfigError("malformed CSV row at line " + std::to_string(lineno));
      p = last ? next : next + 1;
    }
    MomentRecord r;
    r.t = v[0];
    r.mass = v[1];
    r.momentum = Vec3(v[2], v[3], v[4]);
    r.energy = v[5];
    r.entropy = v[6];
    r.fisher = v[7];
    out.push_back(r);
  }
  return out;
}

// Observed order of convergence from errors at several resolutions.

struct ConvergenceRow {
  int n = 0;
  double h = 0.0;
  double error = 0.0;
  std::optional<double> local_order;  // against the previous row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double order = 0.0;  // least-squares slope of log(error) against log(h)
  bool degenerate = false;
};

struct ConvergencePoint {
  int n;
  double h;
  double error;
};

inline ConvergenceTable convergence_table(std::vector<ConvergencePoint> points) {
  if (points.size() < 3) throw ConfigError("convergence table needs at least three resolutions");
  std::sort(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.h > b.h; });
  ConvergenceTable t;
  for (const auto& p : points) {
    if (!(p.h > 0.0) || !(p.error >= 0.0)) throw ConfigError("convergence points need h > 0 and error >= 0");
    t.rows.push_back({p.n, p.h, p.error, std::nullopt});
  }
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    const auto& a = t.rows[k - 1];
    auto& b = t.rows[k];
    if (a.error > 0.0 && b.error > 0.0 && a.h != b.h) b.local_order = std::log(a.error / b.error) / std::log(a.h / b.h);
  }
  const bool zero = std::any_of(points.begin(), points.end(), [](const auto& p) { return p.error == 0.0; });
  double sx = 0.0, sy = 0.0;
  const double m = static_cast<double>(points.size());
  if (!zero) {
    for (const auto& p : points) {
      sx += std::log(p.h);
      sy += std::log(p.error);
    }
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : points) {
      const double dx = std::log(p.h) - sx / m;
      sxx += dx * dx;
      sxy += dx * (std::log(p.error) - sy / m);
    }
    if (sxx > 0.0) t.order = sxy / sxx;
    else t.degenerate = true;
  } else {
    t.degenerate = true;
  }
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.error < b.error; });
  if (!t.degenerate && hi->error <= lo->error * (1.0 + 1e-12)) t.degenerate = true;
  if (t.degenerate) {
    t.order = 0.0;
    warn("convergence table is degenerate: errors do not change with resolution");
  }
  return t;
}

inline nlohmann::ordered_json to_json(const ConvergenceTable& t) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json row = {{"n", r.n}, {"h", r.h}, {"error", r.error}};
    row["local_order"] = r.local_order ? nlohmann::ordered_json(*r.local_order) : nlohmann::ordered_json(nullptr);
    rows.push_back(row);
  }
  return {{"rows", rows}, {"order", t.order}, {"degenerate", t.degenerate}};
}

}  // namespace landau::report
