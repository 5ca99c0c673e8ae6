#pragma once

#include "landau/io.hpp"
#include "landau/kinetic/solver.hpp"

#include <map>
#include <set>

namespace landau::config {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Exponents with |gamma| <= sqrt(22) satisfy the spherical Bakry-Emery
// admissibility bound; one unit beyond that is accepted with a warning.
inline const double admissible_gamma = std::sqrt(22.0);

enum class InitKind { maxwellian, bimodal, file };

struct InitSpec {
  InitKind kind = InitKind::bimodal;
  double mass = 1.0;
  Vec3 mean = Vec3::Zero();
  double temperature = 1.0;  // maxwellian; bimodal components default to 0.5
  double offset = 1.5;
  fs::path path;             // snapshot for kind = file, resolved against the config directory
};

struct LiftedSettings {
  int z_nodes = 16;
  int r_nodes = 12;
  int bandlimit = 8;         // decomposition and product mass
  int layer_bandlimit = 24;  // layer derivatives and the pointwise check
  double dt_probe = 1e-5;
  std::uint64_t seed = 0;    // randomized subadditivity densities
};

struct RunConfig {
  kinetic::SolverConfig solver;
  InitSpec init;
  LiftedSettings lifted;
  fs::path base_dir = ".";
};

namespace detail {

inline void flatten(const json& j, const std::string& prefix, std::map<std::string, json>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) {
      flatten(it.value(), key, out);
    } else if (!out.emplace(key, it.value()).second) {
      throw ConfigError("duplicate configuration key '" + key + "'");
    }
  }
}

class Reader {
 public:
  explicit Reader(std::map<std::string, json> keys) : keys_(std::move(keys)) {}

  template <class T>
  std::optional<T> get(const std::string& key) {
    seen_.insert(key);
    const auto it = keys_.find(key);
    if (it == keys_.end()) return std::nullopt;
    const json& v = it->second;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(key + " must be true or false");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(key + " must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(key + " must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(key + " must be a string");
    }
    return v.get<T>();
  }

  std::optional<Vec3> vec3(const std::string& key) {
    seen_.insert(key);
    const auto it = keys_.find(key);
    if (it == keys_.end()) return std::nullopt;
    const json& v = it->second;
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
      throw ConfigError(key + " must be an array of three numbers");
    return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  }

  void reject_unknown() const {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : keys_)
      if (!seen_.contains(k)) unknown.push_back(k);
    if (unknown.empty()) return;
    std::string msg = "unknown configuration key";
    msg += unknown.size() > 1 ? "s: " : ": ";
    for (std::size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", " : "") + unknown[i];
    throw ConfigError(msg);
  }

 private:
  std::map<std::string, json> keys_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace detail

// Nested objects and dotted keys are equivalent: {"grid": {"n": 32}} == {"grid.n": 32}.
inline RunConfig parse(const json& doc, const fs::path& base_dir = ".") {
  detail::require(doc.is_object(), "configuration must be a JSON object");
  std::map<std::string, json> flat;
  detail::flatten(doc, "", flat);
  detail::Reader in(std::move(flat));
  RunConfig cfg;
  cfg.base_dir = base_dir;
  kinetic::SolverConfig& s = cfg.solver;

  s.n = in.get<int>("grid.n").value_or(s.n);
  detail::require(s.n >= 4 && s.n <= 512, "grid.n must lie in [4, 512]");
  s.half_width = in.get<double>("grid.half_width").value_or(s.half_width);
  detail::require(s.half_width > 0.0 && std::isfinite(s.half_width), "grid.half_width must be positive");

  s.gamma = in.get<double>("potential.gamma").value_or(s.gamma);
  detail::require(std::isfinite(s.gamma) && std::abs(s.gamma) <= admissible_gamma + 1.0,
                  "potential.gamma must lie in [-sqrt(22) - 1, sqrt(22) + 1]");
  if (std::abs(s.gamma) > admissible_gamma) {
    std::ostringstream os;
    os << "potential.gamma = " << s.gamma << " is outside |gamma| <= sqrt(22) ~ " << admissible_gamma
       << "; the Bakry-Emery condition on even functions no longer covers it";
    warn(os.str());
  }
  s.coupling = in.get<double>("potential.coupling");
  if (s.coupling) detail::require(*s.coupling > 0.0 && std::isfinite(*s.coupling), "potential.coupling must be positive");

  s.dt = in.get<double>("time.dt");
  if (s.dt) detail::require(*s.dt > 0.0 && std::isfinite(*s.dt), "time.dt must be positive");
  s.t_end = in.get<double>("time.t_end").value_or(s.t_end);
  detail::require(s.t_end >= 0.0 && std::isfinite(s.t_end), "time.t_end must be >= 0");
  if (const auto scheme = in.get<std::string>("time.scheme")) {
    if (*scheme == "fct") s.scheme = kinetic::Scheme::fct;
    else if (*scheme == "central") s.scheme = kinetic::Scheme::central;
    else throw ConfigError("time.scheme must be 'fct' or 'central'");
  }
  s.every = in.get<int>("output.every").value_or(s.every);
  detail::require(s.every >= 1, "output.every must be >= 1");
  s.snapshots = in.get<bool>("output.snapshots").value_or(s.snapshots);

  InitSpec& init = cfg.init;
  const std::string kind = in.get<std::string>("init.kind").value_or("bimodal");
  if (kind == "maxwellian") {
    init.kind = InitKind::maxwellian;
    init.mass = in.get<double>("init.mass").value_or(1.0);
    init.mean = in.vec3("init.mean").value_or(Vec3::Zero());
    init.temperature = in.get<double>("init.temperature").value_or(1.0);
  } else if (kind == "bimodal") {
    init.kind = InitKind::bimodal;
    init.mass = in.get<double>("init.mass").value_or(1.0);
    init.offset = in.get<double>("init.offset").value_or(1.5);
    init.temperature = in.get<double>("init.temperature").value_or(0.5);
  } else if (kind == "file") {
    init.kind = InitKind::file;
    const auto path = in.get<std::string>("init.path");
    detail::require(path.has_value(), "init.kind = file needs init.path");
    init.path = fs::path(*path).is_absolute() ? fs::path(*path) : base_dir / *path;
  } else {
    throw ConfigError("init.kind must be maxwellian, bimodal or file");
  }
  detail::require(init.mass > 0.0, "init.mass must be positive");
  detail::require(init.temperature > 0.0, "init.temperature must be positive");

  LiftedSettings& l = cfg.lifted;
  l.z_nodes = in.get<int>("lifted.z_nodes").value_or(l.z_nodes);
  l.r_nodes = in.get<int>("lifted.r_nodes").value_or(l.r_nodes);
  l.bandlimit = in.get<int>("lifted.bandlimit").value_or(l.bandlimit);
  l.layer_bandlimit = in.get<int>("lifted.layer_bandlimit").value_or(l.layer_bandlimit);
  l.dt_probe = in.get<double>("lifted.dt_probe").value_or(l.dt_probe);
  l.seed = in.get<std::uint64_t>("lifted.seed").value_or(l.seed);
  detail::require(l.z_nodes >= 2 && l.r_nodes >= 2, "lifted.z_nodes and lifted.r_nodes must be >= 2");
  detail::require(l.bandlimit >= 2 && l.layer_bandlimit >= 2, "lifted bandlimits must be >= 2");
  detail::require(l.dt_probe > 0.0, "lifted.dt_probe must be positive");

  in.reject_unknown();
  return cfg;
}

inline RunConfig load(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("configuration file not found: " + path.string());
  return parse(io::read_json(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

inline kinetic::Density initial_density(const RunConfig& cfg) {
  const kinetic::VelocityGrid g = cfg.solver.grid();
  switch (cfg.init.kind) {
    case InitKind::maxwellian: return kinetic::maxwellian(g, cfg.init.mass, cfg.init.mean, cfg.init.temperature);
    case InitKind::bimodal: return kinetic::bimodal(g, cfg.init.mass, cfg.init.offset, cfg.init.temperature);
    case InitKind::file: {
      kinetic::Density f = io::read_snapshot(cfg.init.path);
      if (!(f.grid == g))
        throw ConfigError("snapshot grid (n = " + std::to_string(f.grid.n()) + ") does not match grid.n / grid.half_width");
      f.validate();
      return f;
    }
  }
  throw ConfigError("unreachable init kind");
}

}  // namespace landau::config
