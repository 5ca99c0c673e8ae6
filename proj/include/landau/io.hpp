#pragma once

#include "landau/kinetic/grid.hpp"
#include "landau/potential.hpp"
#include "landau/sphere/grid.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

namespace landau::io {

namespace fs = std::filesystem;

// Write to a sibling temporary and rename over the target, so readers never
// see a partial file.
inline void atomic_write(const fs::path& target, std::string_view bytes) {
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  static thread_local std::mt19937_64 tag_source{std::random_device{}()};
  const fs::path tmp = dir / ("." + target.filename().string() + ".tmp" + std::to_string(tag_source() % 1000000007));
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw ConfigError("cannot write " + tmp.string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    os.flush();
    if (!os) {
      fs::remove(tmp, ec);
      throw ConfigError("write failed for " + target.string());
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ConfigError("cannot move output into place at " + target.string());
  }
}

inline std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

inline nlohmann::ordered_json read_json(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& path, const nlohmann::ordered_json& j) { atomic_write(path, j.dump(2) + "\n"); }

// Snapshots: raw little-endian float64 in C order (v3 fastest) plus a JSON sidecar.

struct SnapshotMeta {
  int n = 0;
  double half_width = 0.0;
  double t = 0.0;
  double gamma = 0.0;
  double coupling = 0.0;
};

inline fs::path sidecar_path(const fs::path& raw) {
  fs::path p = raw;
  p += ".json";
  return p;
}

inline std::string to_little_endian(const std::vector<double>& values) {
  std::string bytes(values.size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(values[i]);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    std::memcpy(bytes.data() + i * sizeof(double), &bits, sizeof(double));
  }
  return bytes;
}

inline void write_snapshot(const fs::path& raw, const kinetic::Density& f, double t, const Potential& pot) {
  atomic_write(raw, to_little_endian(f.values));
  nlohmann::ordered_json meta = {{"n", f.grid.n()},
                                 {"half_width", f.grid.half_width()},
                                 {"t", t},
                                 {"gamma", pot.gamma()},
                                 {"coupling", pot.coupling()}};
  write_json(sidecar_path(raw), meta);
}

inline SnapshotMeta read_snapshot_meta(const fs::path& sidecar) {
  const auto j = read_json(sidecar);
  SnapshotMeta m;
  try {
    m.n = j.at("n").get<int>();
    m.half_width = j.at("half_width").get<double>();
    m.t = j.value("t", 0.0);
    m.gamma = j.value("gamma", 0.0);
    m.coupling = j.value("coupling", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(sidecar.string() + ": " + e.what());
  }
  return m;
}

// Reads a snapshot; the sidecar next to it supplies the grid.
inline kinetic::Density read_snapshot(const fs::path& raw, SnapshotMeta* meta_out = nullptr) {
  const SnapshotMeta meta = read_snapshot_meta(sidecar_path(raw));
  const kinetic::VelocityGrid g(meta.n, meta.half_width);
  const std::string bytes = read_file(raw);
  if (bytes.size() != g.size() * sizeof(double))
    throw ConfigError(raw.string() + ": expected " + std::to_string(g.size() * sizeof(double)) + " bytes, found " +
                      std::to_string(bytes.size()));
  kinetic::Density f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + i * sizeof(double), sizeof(double));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    f.values[i] = std::bit_cast<double>(bits);
  }
  if (meta_out) *meta_out = meta;
  return f;
}

// Sphere fields as {bandlimit, log, coefficients: [[l, m, re, im], ...]}.
// log = true means the coefficients describe g with f = exp(g).

struct FieldFile {
  sphere::Spectrum coeffs;
  bool log = false;
};

inline nlohmann::ordered_json field_to_json(const sphere::Spectrum& c, bool log) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (int l = 0; l <= c.bandlimit(); ++l)
    for (int m = -l; m <= l; ++m) {
      const auto z = c(l, m);
      if (z != std::complex<double>(0.0, 0.0)) list.push_back({l, m, z.real(), z.imag()});
    }
  return {{"bandlimit", c.bandlimit()}, {"log", log}, {"coefficients", list}};
}

inline FieldFile field_from_json(const nlohmann::ordered_json& j) {
  FieldFile out;
  try {
    const int L = j.at("bandlimit").get<int>();
    if (L < 0) throw ConfigError("field bandlimit must be >= 0");
    out.coeffs = sphere::Spectrum(L);
    out.log = j.value("log", false);
    for (const auto& e : j.at("coefficients")) {
      if (!e.is_array() || e.size() != 4) throw ConfigError("field coefficients must be [l, m, re, im]");
      const int l = e[0].get<int>(), m = e[1].get<int>();
      if (l < 0 || l > L || m < -l || m > l)
        throw ConfigError("coefficient (" + std::to_string(l) + ", " + std::to_string(m) + ") outside the bandlimit");
      out.coeffs(l, m) = {e[2].get<double>(), e[3].get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field file: ") + e.what());
  }
  return out;
}

}  // namespace landau::io
