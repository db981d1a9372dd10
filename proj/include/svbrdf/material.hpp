#pragma once

#include <array>
#include <string>
#include <vector>

#include "svbrdf/common.hpp"
#include "svbrdf/image.hpp"

namespace svbrdf {

/// Channel layout shared by every per-texel parameter image: optimizer
/// variables, network outputs and gradients with respect to the maps.
/// Normals enter as the two slopes (sx, sy) with n = normalize(sx, sy, 1).
namespace param {
inline constexpr int kSlopeX = 0;
inline constexpr int kSlopeY = 1;
inline constexpr int kDiffuse = 2;
inline constexpr int kSpecular = 5;
inline constexpr int kRoughness = 8;
inline constexpr int kCount = 9;
}  // namespace param

struct TexelParams {
  Vec3 normal{0, 0, 1};
  Rgb diffuse{0.5};
  Rgb specular{0.04};
  double roughness = 0.5;
};

/// The four material maps. Normals are tangent-space unit vectors with +z up.
struct SvbrdfMaps {
  int width = 0;
  int height = 0;
  Image normal;     // 3 channels
  Image diffuse;    // 3 channels
  Image specular;   // 3 channels
  Image roughness;  // 1 channel

  SvbrdfMaps() = default;
  SvbrdfMaps(int w, int h, const TexelParams& fill = {})
      : width(w), height(h), normal(w, h, 3), diffuse(w, h, 3), specular(w, h, 3),
        roughness(w, h, 1) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) set_texel(x, y, fill);
  }

  TexelParams texel(int x, int y) const {
    return {normal.rgb(x, y), diffuse.rgb(x, y), specular.rgb(x, y), roughness.at(x, y)};
  }

  void set_texel(int x, int y, const TexelParams& t) {
    normal.set_rgb(x, y, t.normal);
    diffuse.set_rgb(x, y, t.diffuse);
    specular.set_rgb(x, y, t.specular);
    roughness.at(x, y) = t.roughness;
  }

  bool same_size(const SvbrdfMaps& o) const { return width == o.width && height == o.height; }

  bool operator==(const SvbrdfMaps&) const = default;
};

struct Violation {
  std::string map;
  int x = -1;
  int y = -1;
  std::string rule;
};

namespace detail {
inline bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }
}  // namespace detail

/// Reports every broken invariant instead of throwing.
inline std::vector<Violation> validate(const SvbrdfMaps& m) {
  std::vector<Violation> out;
  const auto check_dims = [&](const Image& img, const char* name, int channels) {
    if (img.width() != m.width || img.height() != m.height || img.channels() != channels) {
      out.push_back({name, -1, -1, "dimensions differ from declared size"});
      return false;
    }
    return true;
  };
  const bool ok_n = check_dims(m.normal, "normal", 3);
  const bool ok_d = check_dims(m.diffuse, "diffuse", 3);
  const bool ok_s = check_dims(m.specular, "specular", 3);
  const bool ok_r = check_dims(m.roughness, "roughness", 1);

  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (ok_n) {
        const Vec3 n = m.normal.rgb(x, y);
        const double len = length(n);
        if (!(std::abs(len - 1.0) <= 1e-6)) out.push_back({"normal", x, y, "length not 1 +- 1e-6"});
        if (!(n.z > 0.0)) out.push_back({"normal", x, y, "z component not positive"});
      }
      if (ok_d) {
        const Rgb d = m.diffuse.rgb(x, y);
        if (!(detail::in_unit(d.x) && detail::in_unit(d.y) && detail::in_unit(d.z)))
          out.push_back({"diffuse", x, y, "albedo outside [0,1]"});
      }
      if (ok_s) {
        const Rgb s = m.specular.rgb(x, y);
        if (!(detail::in_unit(s.x) && detail::in_unit(s.y) && detail::in_unit(s.z)))
          out.push_back({"specular", x, y, "albedo outside [0,1]"});
      }
      if (ok_r) {
        const double r = m.roughness.at(x, y);
        if (!(r >= kRoughnessMin && r <= 1.0))
          out.push_back({"roughness", x, y, "roughness outside [0.045,1]"});
      }
    }
  }
  return out;
}

/// Throws if the four maps disagree with the declared size.
inline void check_shape(const SvbrdfMaps& m, const char* who) {
  const auto fits = [&](const Image& img, int ch) {
    return img.width() == m.width && img.height() == m.height && img.channels() == ch;
  };
  require(fits(m.normal, 3) && fits(m.diffuse, 3) && fits(m.specular, 3) && fits(m.roughness, 1),
          std::string(who) + ": map dimensions disagree");
}

inline Vec3 normal_from_slopes(double sx, double sy) { return normalize(Vec3{sx, sy, 1.0}); }

/// Inverse of normal_from_slopes; requires n.z > 0.
inline std::array<double, 2> slopes_from_normal(const Vec3& n) { return {n.x / n.z, n.y / n.z}; }

/// Derivatives of normalize(sx, sy, 1) with respect to sx and sy.
inline std::array<Vec3, 2> normal_slope_jacobian(const Vec3& n) {
  const double inv_len = n.z;  // 1 / |(sx, sy, 1)|
  return {(Vec3{1, 0, 0} - n * n.x) * inv_len, (Vec3{0, 1, 0} - n * n.y) * inv_len};
}

/// Flattens the maps into the 9-channel parameter layout.
inline Image to_param_image(const SvbrdfMaps& m) {
  Image p(m.width, m.height, param::kCount);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      const TexelParams t = m.texel(x, y);
      const auto s = slopes_from_normal(t.normal);
      auto px = p.pixel(x, y);
      px[param::kSlopeX] = s[0];
      px[param::kSlopeY] = s[1];
      for (int c = 0; c < 3; ++c) {
        px[param::kDiffuse + c] = t.diffuse[c];
        px[param::kSpecular + c] = t.specular[c];
      }
      px[param::kRoughness] = t.roughness;
    }
  }
  return p;
}

// Cook-Torrance with GGX distribution (alpha = roughness^2), Schlick Fresnel
// and separable Schlick-GGX shadowing (k = alpha / 2).
//
// The specular term is written as F * D * A(n.wi) * A(n.wo) / 4 with
// A(x) = G1(x) / x = 1 / (x (1 - k) + k), which is algebraically
// D F G / (4 (n.wi)(n.wo)). Every product is formed in an order that is
// symmetric in (wi, wo) so reciprocity holds bit for bit.

namespace detail {

struct BrdfTerms {
  double ni, no, nh, hd;
  Vec3 h;
  double alpha, a2, q, D, k, Ai, Ao, pow5;
};

inline bool brdf_terms(const Vec3& n, double roughness, const Vec3& wi, const Vec3& wo,
                       BrdfTerms& t) {
  t.ni = dot(n, wi);
  t.no = dot(n, wo);
  if (!(t.ni > 0.0) || !(t.no > 0.0)) return false;
  const Vec3 hsum = wi + wo;
  const double hl = length(hsum);
  t.h = hsum / hl;
  t.nh = dot(n, t.h);
  t.hd = 0.5 * hl;  // wo.h == wi.h == |wi + wo| / 2 for unit vectors
  t.alpha = roughness * roughness;
  t.a2 = t.alpha * t.alpha;
  t.q = t.nh * t.nh * (t.a2 - 1.0) + 1.0;
  t.D = t.a2 / (kPi * t.q * t.q);
  t.k = 0.5 * t.alpha;
  t.Ai = 1.0 / (t.ni * (1.0 - t.k) + t.k);
  t.Ao = 1.0 / (t.no * (1.0 - t.k) + t.k);
  const double m = std::clamp(1.0 - t.hd, 0.0, 1.0);
  const double m2 = m * m;
  t.pow5 = m2 * m2 * m;
  return true;
}

}  // namespace detail

inline Rgb eval_brdf(const Vec3& normal, const Rgb& diffuse, const Rgb& specular,
                     double roughness, const Vec3& wi, const Vec3& wo) {
  detail::BrdfTerms t;
  if (!detail::brdf_terms(normal, roughness, wi, wo, t)) return Rgb{0.0};
  const double lobe = t.D * (t.Ai * t.Ao) * 0.25;
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    const double F = specular[c] + (1.0 - specular[c]) * t.pow5;
    out[c] = diffuse[c] / kPi + F * lobe;
  }
  return out;
}

inline Rgb eval_brdf(const TexelParams& p, const Vec3& wi, const Vec3& wo) {
  return eval_brdf(p.normal, p.diffuse, p.specular, p.roughness, wi, wo);
}

/// BRDF value and its partials in the param:: layout; partial[i] is the RGB
/// derivative with respect to parameter i.
struct BrdfJacobian {
  Rgb value{0.0};
  std::array<Rgb, param::kCount> partial{};
};

inline BrdfJacobian eval_brdf_grad(const Vec3& normal, const Rgb& diffuse, const Rgb& specular,
                                   double roughness, const Vec3& wi, const Vec3& wo) {
  BrdfJacobian J;
  detail::BrdfTerms t;
  if (!detail::brdf_terms(normal, roughness, wi, wo, t)) return J;

  const double AiAo = t.Ai * t.Ao;
  const double lobe = t.D * AiAo * 0.25;

  const double q3 = t.q * t.q * t.q;
  const double dD_dnh = -4.0 * t.a2 * t.nh * (t.a2 - 1.0) / (kPi * q3);
  const double dD_dalpha =
      2.0 * t.alpha / (kPi * t.q * t.q) - 4.0 * t.alpha * t.a2 * t.nh * t.nh / (kPi * q3);
  const double dAi_dni = -(1.0 - t.k) * t.Ai * t.Ai;
  const double dAo_dno = -(1.0 - t.k) * t.Ao * t.Ao;
  const double dAi_dk = -(1.0 - t.ni) * t.Ai * t.Ai;
  const double dAo_dk = -(1.0 - t.no) * t.Ao * t.Ao;

  // d(lobe)/d(normal) as a vector, then projected onto the slope directions.
  const Vec3 dlobe_dn =
      (t.h * (dD_dnh * AiAo) + wi * (t.D * dAi_dni * t.Ao) + wo * (t.D * t.Ai * dAo_dno)) * 0.25;
  const double dlobe_dalpha = 0.25 * (dD_dalpha * AiAo + t.D * 0.5 * (dAi_dk * t.Ao + t.Ai * dAo_dk));
  const double dlobe_drough = dlobe_dalpha * 2.0 * roughness;

  const auto dn = normal_slope_jacobian(normal);
  const double dlobe_dsx = dot(dlobe_dn, dn[0]);
  const double dlobe_dsy = dot(dlobe_dn, dn[1]);

  for (int c = 0; c < 3; ++c) {
    const double F = specular[c] + (1.0 - specular[c]) * t.pow5;
    J.value[c] = diffuse[c] / kPi + F * lobe;
    J.partial[param::kSlopeX][c] = F * dlobe_dsx;
    J.partial[param::kSlopeY][c] = F * dlobe_dsy;
    J.partial[param::kDiffuse + c][c] = 1.0 / kPi;
    J.partial[param::kSpecular + c][c] = lobe * (1.0 - t.pow5);
    J.partial[param::kRoughness][c] = F * dlobe_drough;
  }
  return J;
}

inline BrdfJacobian eval_brdf_grad(const TexelParams& p, const Vec3& wi, const Vec3& wo) {
  return eval_brdf_grad(p.normal, p.diffuse, p.specular, p.roughness, wi, wo);
}

}  // namespace svbrdf
