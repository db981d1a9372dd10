#pragma once

#include <vector>

#include "svbrdf/material.hpp"

// Small tileable synthetic materials for experiments and tests, standing in
// for an artist-made library.

namespace svbrdf {

/// Periodic value noise in [0, 1] with `cells` lattice cells per period.
class ValueNoise {
public:
  ValueNoise(int cells, uint64_t seed) : cells_(cells), lattice_(size_t(cells) * cells) {
    require(cells >= 1, "value noise: cells must be >= 1");
    Rng rng(seed);
    for (double& v : lattice_) v = rng.uniform();
  }

  /// u, v in periods; wraps.
  double operator()(double u, double v) const {
    const double x = u * cells_, y = v * cells_;
    const double xf = std::floor(x), yf = std::floor(y);
    const double tx = smooth(x - xf), ty = smooth(y - yf);
    const int x0 = int(xf), y0 = int(yf);
    const double a = at(x0, y0), b = at(x0 + 1, y0), c = at(x0, y0 + 1), d = at(x0 + 1, y0 + 1);
    return (1 - ty) * ((1 - tx) * a + tx * b) + ty * ((1 - tx) * c + tx * d);
  }

private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  double at(int x, int y) const {
    const int n = cells_;
    x = ((x % n) + n) % n;
    y = ((y % n) + n) % n;
    return lattice_[size_t(y) * n + x];
  }

  int cells_;
  std::vector<double> lattice_;
};

/// Two-tone material with noise-driven albedo, specular, roughness and a
/// bumpy height field. Tileable at its own size.
inline SvbrdfMaps procedural_material(int size, uint64_t seed) {
  require(size >= 2, "procedural_material: size must be >= 2");
  Rng rng(seed);
  const ValueNoise pattern(2 + rng.uniform_int(0, 4), rng.next_u64());
  const ValueNoise detail(8, rng.next_u64());
  const ValueNoise bumps(4 + rng.uniform_int(0, 4), rng.next_u64());
  Rgb base_a, base_b;
  for (int c = 0; c < 3; ++c) {
    base_a[c] = rng.uniform(0.05, 0.9);
    base_b[c] = rng.uniform(0.05, 0.9);
  }
  const double spec_a = rng.uniform(0.02, 0.6), spec_b = rng.uniform(0.02, 0.6);
  const double rough_a = rng.uniform(0.1, 0.9), rough_b = rng.uniform(0.1, 0.9);
  const double bump_amp = rng.uniform(0.05, 0.4);

  SvbrdfMaps m(size, size);
  const double h = 1.0 / size;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const double u = (x + 0.5) * h, v = (y + 0.5) * h;
      const double t = std::clamp(1.6 * pattern(u, v) - 0.3 + 0.2 * (detail(u, v) - 0.5), 0.0, 1.0);
      TexelParams p;
      p.diffuse = base_a * (1 - t) + base_b * t;
      p.specular = Rgb{spec_a * (1 - t) + spec_b * t};
      p.roughness = std::clamp(rough_a * (1 - t) + rough_b * t, kRoughnessMin, 1.0);
      const double sx = bump_amp * (bumps(u + h, v) - bumps(u - h, v)) / (2 * h) / size;
      const double sy = bump_amp * (bumps(u, v + h) - bumps(u, v - h)) / (2 * h) / size;
      p.normal = normal_from_slopes(sx, sy);
      m.set_texel(x, y, p);
    }
  return m;
}

inline std::vector<SvbrdfMaps> procedural_library(int count, int size, uint64_t seed) {
  std::vector<SvbrdfMaps> out;
  out.reserve(size_t(count));
  for (int i = 0; i < count; ++i) out.push_back(procedural_material(size, derive_seed(seed, uint64_t(i))));
  return out;
}

}  // namespace svbrdf
