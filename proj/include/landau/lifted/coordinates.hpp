#pragma once

#include "landau/core.hpp"

namespace landau::lifted {

// Centre of mass, half distance and direction of a velocity pair:
// v = z + r sigma, w = z - r sigma.
struct ZRS {
  Vec3 z;
  double r;
  Vec3 sigma;
};

inline ZRS to_zrs(const Vec3& v, const Vec3& w) {
  const Vec3 d = v - w;
  const double len = d.norm();
  if (!(len > 0.0)) throw DomainError("to_zrs: v = w, direction undefined on the diagonal");
  return {0.5 * (v + w), 0.5 * len, d / len};
}

inline std::pair<Vec3, Vec3> from_zrs(const Vec3& z, double r, const Vec3& sigma) {
  return {z + r * sigma, z - r * sigma};
}

inline std::pair<Vec3, Vec3> from_zrs(const ZRS& p) { return from_zrs(p.z, p.r, p.sigma); }

}  // namespace landau::lifted
