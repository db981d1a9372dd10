#pragma once

#include <optional>
#include <string>

#include "svbrdf/common.hpp"
#include "svbrdf/image.hpp"
#include "svbrdf/material.hpp"

namespace svbrdf {

/// Isotropic point light standing in for the surrounding environment.
struct AmbientLight {
  Vec3 pos{0.5, 0.5, 2.0};
  Rgb intensity{0.0};

  bool operator==(const AmbientLight&) const = default;
};

/// One capture configuration. The material occupies the unit square on
/// z = 0; positions are in plane widths. The flash is a point light whose
/// axis points at the plane centre, attenuated by max(cos phi, 0)^falloff.
struct SceneSample {
  Vec3 camera_pos{0.5, 0.5, 2.0};
  Vec3 light_pos{0.5, 0.5, 2.0};
  Rgb light_intensity{4.0 * kPi};
  double falloff_exponent = 0.0;
  double fov_deg = 40.0;
  std::optional<AmbientLight> ambient;

  bool operator==(const SceneSample&) const = default;
};

inline constexpr Vec3 kPlaneCenter{0.5, 0.5, 0.0};

inline void validate_scene(const SceneSample& s) {
  require(s.camera_pos.z > 0, "scene: camera must be above the plane");
  require(s.light_pos.z > 0, "scene: light must be above the plane");
  require(s.light_intensity.x >= 0 && s.light_intensity.y >= 0 && s.light_intensity.z >= 0,
          "scene: negative light intensity");
  require(s.falloff_exponent >= 0, "scene: negative falloff exponent");
  require(s.fov_deg >= 10 && s.fov_deg <= 90, "scene: fov outside [10, 90] degrees");
  if (s.ambient) {
    require(s.ambient->pos.z > 0, "scene: ambient light must be above the plane");
    const Rgb& a = s.ambient->intensity;
    require(a.x >= 0 && a.y >= 0 && a.z >= 0, "scene: negative ambient intensity");
  }
}

/// Plane position of texel (x, y) for a width x height map.
inline Vec3 texel_position(int x, int y, int width, int height) {
  return {(x + 0.5) / width, (y + 0.5) / height, 0.0};
}

namespace detail {

struct LightContribution {
  Vec3 wi;
  Rgb irradiance;  // intensity * falloff / d^2, before the cosine
};

template <class Fn>
void for_each_light(const SceneSample& s, const Vec3& p, Fn&& fn) {
  {
    const Vec3 to_light = s.light_pos - p;
    const double d2 = dot(to_light, to_light);
    const Vec3 wi = to_light / std::sqrt(d2);
    double falloff = 1.0;
    if (s.falloff_exponent != 0.0) {
      const Vec3 axis = normalize(kPlaneCenter - s.light_pos);
      falloff = std::pow(std::max(dot(axis, -wi), 0.0), s.falloff_exponent);
    }
    fn(LightContribution{wi, s.light_intensity * (falloff / d2)});
  }
  if (s.ambient) {
    const Vec3 to_light = s.ambient->pos - p;
    const double d2 = dot(to_light, to_light);
    fn(LightContribution{to_light / std::sqrt(d2), s.ambient->intensity / d2});
  }
}

}  // namespace detail

/// Outgoing radiance of one texel toward the camera.
inline Rgb shade_texel(const TexelParams& t, const Vec3& p, const SceneSample& s) {
  const Vec3 wo = normalize(s.camera_pos - p);
  Rgb L{0.0};
  detail::for_each_light(s, p, [&](const detail::LightContribution& lc) {
    const double cos_i = dot(t.normal, lc.wi);
    if (!(cos_i > 0.0)) return;
    const Rgb f = eval_brdf(t, lc.wi, wo);
    L += f * lc.irradiance * cos_i;
  });
  return L;
}

/// Orthographic, rectified rendering: one texel is one surface point.
inline RadianceImage render(const SvbrdfMaps& maps, const SceneSample& scene) {
  validate_scene(scene);
  check_shape(maps, "render");
  RadianceImage out(maps.width, maps.height);
  parallel_for(maps.height, [&](int y) {
    for (int x = 0; x < maps.width; ++x)
      out.set_rgb(x, y, shade_texel(maps.texel(x, y), texel_position(x, y, maps.width, maps.height), scene));
  });
  return out;
}

/// Contracts a per-pixel RGB cotangent with the texel Jacobians. The result
/// has param::kCount channels laid out as in param::.
inline Image render_grad(const SvbrdfMaps& maps, const SceneSample& scene, const Image& upstream) {
  validate_scene(scene);
  check_shape(maps, "render_grad");
  require(upstream.width() == maps.width && upstream.height() == maps.height &&
              upstream.channels() == 3,
          "render_grad: upstream shape does not match maps");
  Image grad(maps.width, maps.height, param::kCount);
  parallel_for(maps.height, [&](int y) {
    for (int x = 0; x < maps.width; ++x) {
      const Rgb up = upstream.rgb(x, y);
      if (up == Rgb{0.0}) continue;
      const TexelParams t = maps.texel(x, y);
      const Vec3 p = texel_position(x, y, maps.width, maps.height);
      const Vec3 wo = normalize(scene.camera_pos - p);
      const auto dn = normal_slope_jacobian(t.normal);
      auto g = grad.pixel(x, y);
      detail::for_each_light(scene, p, [&](const detail::LightContribution& lc) {
        const double cos_i = dot(t.normal, lc.wi);
        if (!(cos_i > 0.0)) return;
        const BrdfJacobian J = eval_brdf_grad(t, lc.wi, wo);
        const Rgb w = up * lc.irradiance;  // dLoss/d(f * cos)
        for (int k = 0; k < param::kCount; ++k) g[k] += dot(w, J.partial[k]) * cos_i;
        g[param::kSlopeX] += dot(w, J.value) * dot(lc.wi, dn[0]);
        g[param::kSlopeY] += dot(w, J.value) * dot(lc.wi, dn[1]);
      });
    }
  });
  return grad;
}

struct DegradeParams {
  double noise_sigma = 0.0;
  bool clip = true;
  double gamma = 2.2;
  int quantize_bits = 8;
  uint64_t seed = 0;
};

/// Standard normal variate for stream position `index`; depends only on
/// (seed, index) so any evaluation order gives identical results.
inline double counter_normal(uint64_t seed, uint64_t index) {
  const double u1 = 1.0 - u64_to_unit(derive_seed(seed, 2 * index));
  const double u2 = u64_to_unit(derive_seed(seed, 2 * index + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

/// Noise, clipping, gamma encoding, then quantization, in that order.
inline LdrImage degrade(const Image& img, const DegradeParams& p) {
  require(p.noise_sigma >= 0, "degrade: negative noise sigma");
  require(p.quantize_bits >= 1 && p.quantize_bits <= 16, "degrade: quantize_bits outside [1,16]");
  require(p.gamma > 0, "degrade: gamma must be positive");
  LdrImage out(img.width(), img.height(), img.channels());
  const double levels = double((1u << p.quantize_bits) - 1);
  const double inv_gamma = 1.0 / p.gamma;
  const int row_len = img.width() * img.channels();
  parallel_for(img.height(), [&](int y) {
    for (int i = y * row_len; i < (y + 1) * row_len; ++i) {
      double v = img.data()[size_t(i)];
      if (p.noise_sigma > 0) v += p.noise_sigma * counter_normal(p.seed, uint64_t(i));
      if (p.clip) v = std::min(v, 1.0);
      v = std::max(v, 0.0);
      if (p.gamma != 1.0) v = std::pow(v, inv_gamma);
      out.data()[size_t(i)] = std::floor(v * levels + 0.5) / levels;
    }
  });
  return out;
}

inline RadianceImage invert_gamma(const Image& img, double gamma) {
  RadianceImage out{Image(img.width(), img.height(), img.channels())};
  for (size_t i = 0; i < img.size(); ++i) out.data()[i] = std::pow(img.data()[i], gamma);
  return out;
}

}  // namespace svbrdf
