#pragma once

#include <array>
#include <vector>

#include "svbrdf/common.hpp"
#include "svbrdf/material.hpp"
#include "svbrdf/renderer.hpp"
#include "svbrdf/synthesis.hpp"

namespace svbrdf {

struct LossWeights {
  double w_render = 1.0;
  double w_map = 0.1;  // applied to each of the four map terms
  int n_render_configs = 9;
  double log_eps = 0.01;
  double tv_weight = 0.01;  // inverse optimizer only
};

inline void validate(const LossWeights& w) {
  require(w.w_render >= 0 && w.w_map >= 0 && w.tv_weight >= 0, "loss weights must be non-negative");
  require(w.n_render_configs >= 1, "loss weights: n_render_configs must be >= 1");
  require(w.log_eps > 0, "loss weights: log_eps must be positive");
}

/// A scalar objective with its gradient in the param:: layout.
struct LossValue {
  double value = 0.0;
  Image grad;
};

/// Mean of |log(a + eps) - log(b + eps)| over pixels and channels, with the
/// derivative with respect to a (0 at exact ties).
struct LogL1 {
  double value = 0.0;
  Image d_a;
};

inline LogL1 log_l1(const Image& a, const Image& b, double eps, double scale = 1.0) {
  require(a.same_shape(b), "log_l1: shape mismatch");
  LogL1 out{0.0, Image(a.width(), a.height(), a.channels())};
  const double inv_n = scale / double(a.size());
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double pa = a.data()[i] + eps;
    const double diff = std::log(pa) - std::log(b.data()[i] + eps);
    sum += std::abs(diff);
    out.d_a.data()[i] = sign(diff) * inv_n / pa;
  }
  out.value = sum * inv_n;
  return out;
}

inline void accumulate(Image& into, const Image& g, double w = 1.0) {
  for (size_t i = 0; i < into.size(); ++i) into.data()[i] += w * g.data()[i];
}

/// l1 distance between log renderings of pred and gt, averaged over the
/// configurations, pixels and channels.
inline LossValue render_loss(const SvbrdfMaps& pred, const SvbrdfMaps& gt,
                             const std::vector<SceneSample>& configs, double log_eps = 0.01) {
  require(pred.same_size(gt), "render_loss: dimension mismatch");
  require(!configs.empty(), "render_loss: need at least one configuration");
  LossValue out{0.0, Image(pred.width, pred.height, param::kCount)};
  const double per_config = 1.0 / double(configs.size());
  for (const SceneSample& scene : configs) {
    const RadianceImage rp = render(pred, scene);
    const RadianceImage rg = render(gt, scene);
    const LogL1 l = log_l1(rp, rg, log_eps, per_config);
    out.value += l.value;
    accumulate(out.grad, render_grad(pred, scene, l.d_a));
  }
  return out;
}

enum MapTerm { kNormalTerm = 0, kDiffuseTerm, kSpecularTerm, kRoughnessTerm };

struct MapLosses {
  std::array<double, 4> value{};
  std::array<Image, 4> grad;  // each in the param:: layout

  double sum() const { return value[0] + value[1] + value[2] + value[3]; }
};

/// Mean absolute difference per map. Normals are compared as 3-vectors and
/// the gradient is taken through the slope parameterization.
inline MapLosses map_losses(const SvbrdfMaps& pred, const SvbrdfMaps& gt) {
  require(pred.same_size(gt), "map_losses: dimension mismatch");
  check_shape(pred, "map_losses");
  check_shape(gt, "map_losses");
  MapLosses out;
  for (auto& g : out.grad) g = Image(pred.width, pred.height, param::kCount);
  const double n = double(pred.width) * pred.height;
  const double w3 = 1.0 / (3.0 * n), w1 = 1.0 / n;
  for (int y = 0; y < pred.height; ++y)
    for (int x = 0; x < pred.width; ++x) {
      const TexelParams p = pred.texel(x, y), g = gt.texel(x, y);
      const auto dn = normal_slope_jacobian(p.normal);
      Vec3 sn;
      for (int c = 0; c < 3; ++c) {
        const double dnrm = p.normal[c] - g.normal[c];
        const double ddif = p.diffuse[c] - g.diffuse[c];
        const double dspc = p.specular[c] - g.specular[c];
        out.value[kNormalTerm] += std::abs(dnrm);
        out.value[kDiffuseTerm] += std::abs(ddif);
        out.value[kSpecularTerm] += std::abs(dspc);
        sn[c] = sign(dnrm) * w3;
        out.grad[kDiffuseTerm].at(x, y, param::kDiffuse + c) = sign(ddif) * w3;
        out.grad[kSpecularTerm].at(x, y, param::kSpecular + c) = sign(dspc) * w3;
      }
      out.grad[kNormalTerm].at(x, y, param::kSlopeX) = dot(sn, dn[0]);
      out.grad[kNormalTerm].at(x, y, param::kSlopeY) = dot(sn, dn[1]);
      const double drgh = p.roughness - g.roughness;
      out.value[kRoughnessTerm] += std::abs(drgh);
      out.grad[kRoughnessTerm].at(x, y, param::kRoughness) = sign(drgh) * w1;
    }
  out.value[kNormalTerm] *= w3;
  out.value[kDiffuseTerm] *= w3;
  out.value[kSpecularTerm] *= w3;
  out.value[kRoughnessTerm] *= w1;
  return out;
}

struct LossBreakdown {
  double render = 0.0;
  std::array<double, 4> maps{};
};

/// L = w_render * L_render + w_map * (L_normal + L_diffuse + L_specular + L_roughness)
inline double combine_losses(const LossBreakdown& parts, const LossWeights& w) {
  return w.w_render * parts.render +
         w.w_map * (parts.maps[0] + parts.maps[1] + parts.maps[2] + parts.maps[3]);
}

struct TotalLoss {
  LossBreakdown parts;
  double value = 0.0;
  Image grad;
};

inline TotalLoss total_loss(const SvbrdfMaps& pred, const SvbrdfMaps& gt,
                            const std::vector<SceneSample>& configs, const LossWeights& w) {
  validate(w);
  TotalLoss out;
  out.grad = Image(pred.width, pred.height, param::kCount);
  if (w.w_render != 0.0) {
    const LossValue r = render_loss(pred, gt, configs, w.log_eps);
    out.parts.render = r.value;
    accumulate(out.grad, r.grad, w.w_render);
  }
  const MapLosses m = map_losses(pred, gt);
  out.parts.maps = m.value;
  for (const Image& g : m.grad) accumulate(out.grad, g, w.w_map);
  out.value = combine_losses(out.parts, w);
  return out;
}

/// Anisotropic total variation: sum of |forward x difference| and
/// |forward y difference| over all channels, divided by
/// 2 * pixels * channels. Differences past the last row/column are zero.
inline LossValue tv_image(const Image& img) {
  require(img.width() >= 2 && img.height() >= 2, "tv: image must be at least 2x2");
  LossValue out{0.0, Image(img.width(), img.height(), img.channels())};
  const double inv = 1.0 / (2.0 * double(img.size()));
  double sum = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < img.channels(); ++c) {
        const double v = img.at(x, y, c);
        if (x + 1 < img.width()) {
          const double d = img.at(x + 1, y, c) - v;
          sum += std::abs(d);
          out.grad.at(x + 1, y, c) += sign(d) * inv;
          out.grad.at(x, y, c) -= sign(d) * inv;
        }
        if (y + 1 < img.height()) {
          const double d = img.at(x, y + 1, c) - v;
          sum += std::abs(d);
          out.grad.at(x, y + 1, c) += sign(d) * inv;
          out.grad.at(x, y, c) -= sign(d) * inv;
        }
      }
  out.value = sum * inv;
  return out;
}

/// TV over all nine parameter channels (normals through their slopes).
inline LossValue tv_loss(const SvbrdfMaps& maps) { return tv_image(to_param_image(maps)); }

namespace detail {

/// Direction within max_angle of m, kept above the horizon.
inline Vec3 jitter_direction(const Vec3& m, double max_angle, Rng& rng) {
  const Vec3 helper = std::abs(m.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  Vec3 t = normalize(helper - m * dot(helper, m));
  const Vec3 b{m.y * t.z - m.z * t.y, m.z * t.x - m.x * t.z, m.x * t.y - m.y * t.x};
  for (int attempt = 0; attempt < 16; ++attempt) {
    const double theta = rng.uniform(0.0, max_angle);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const Vec3 d = m * std::cos(theta) + (t * std::cos(phi) + b * std::sin(phi)) * std::sin(theta);
    if (d.z > 1e-3) return normalize(d);
  }
  return m;
}

}  // namespace detail

inline constexpr double kLossConfigDistance = 2.5;

/// Rendering configurations for the loss: the first 2n/3 (integer division)
/// put the light near the mirror direction of the view about +z, jittered by
/// at most 5 degrees; the rest draw view and light independently from the
/// cosine-weighted hemisphere. No ambient light and no falloff.
inline std::vector<SceneSample> sample_loss_configs(int n, Rng& rng) {
  require(n >= 1, "sample_loss_configs: n must be >= 1");
  const int n_specular = (2 * n) / 3;
  const double d = kLossConfigDistance;
  std::vector<SceneSample> out;
  out.reserve(size_t(n));
  for (int i = 0; i < n; ++i) {
    SceneSample s;
    const Vec3 view = sample_cosine_hemisphere(rng);
    Vec3 light;
    if (i < n_specular)
      light = detail::jitter_direction({-view.x, -view.y, view.z}, 5.0 * kPi / 180.0, rng);
    else
      light = sample_cosine_hemisphere(rng);
    s.camera_pos = kPlaneCenter + view * d;
    s.light_pos = kPlaneCenter + light * d;
    s.light_intensity = Rgb{nominal_intensity(d)};
    out.push_back(s);
  }
  return out;
}

}  // namespace svbrdf
