#pragma once

#include <optional>
#include <vector>

#include "svbrdf/common.hpp"
#include "svbrdf/io.hpp"
#include "svbrdf/material.hpp"
#include "svbrdf/renderer.hpp"

namespace svbrdf {

struct Range {
  double lo = 0, hi = 0;
  double mid() const { return 0.5 * (lo + hi); }
  bool operator==(const Range&) const = default;
};

/// Online training-data generator settings. Distances are in plane widths.
struct GenConfig {
  int crop_size = 64;
  int n_inputs_min = 1;
  int n_inputs_max = 5;
  Range camera_distance{1.5, 3.5};
  Range light_distance{1.5, 3.5};
  double fov_jitter_deg = 5.0;
  Range falloff{0.0, 4.0};
  Range intensity_scale{0.5, 2.0};  // log-uniform multiplier on the nominal flash
  Range white_balance{0.8, 1.2};
  double ambient_probability = 0.5;
  double ambient_max_fraction = 0.2;
  Range noise_sigma{0.0, 0.02};
  bool clip = true;
  double gamma = 2.2;
  int quantize_bits = 8;
  Range augment_scale{0.8, 1.25};  // log-uniform
  bool perturbations_enabled = true;
  double mix_weight = -1.0;  // < 0: drawn uniformly per sample
  uint64_t seed = 0;

  bool operator==(const GenConfig&) const = default;
};

inline void validate(const GenConfig& c) {
  const auto range_ok = [](const Range& r, double lo, double hi) {
    return r.lo <= r.hi && r.lo >= lo && r.hi <= hi;
  };
  require(c.crop_size >= 2, "gen config: crop_size must be >= 2");
  require(c.n_inputs_min >= 1 && c.n_inputs_min <= c.n_inputs_max && c.n_inputs_max <= 10,
          "gen config: n_inputs range must lie within [1, 10]");
  require(range_ok(c.camera_distance, 1e-3, 1e3), "gen config: bad camera_distance range");
  require(range_ok(c.light_distance, 1e-3, 1e3), "gen config: bad light_distance range");
  require(c.fov_jitter_deg >= 0 && c.fov_jitter_deg <= 30, "gen config: fov_jitter_deg outside [0, 30]");
  require(range_ok(c.falloff, 0, 100), "gen config: bad falloff range");
  require(range_ok(c.intensity_scale, 1e-6, 1e6), "gen config: bad intensity_scale range");
  require(range_ok(c.white_balance, 0, 10), "gen config: bad white_balance range");
  require(c.ambient_probability >= 0 && c.ambient_probability <= 1,
          "gen config: ambient_probability outside [0, 1]");
  require(c.ambient_max_fraction >= 0 && c.ambient_max_fraction <= 1,
          "gen config: ambient_max_fraction outside [0, 1]");
  require(range_ok(c.noise_sigma, 0, 1), "gen config: bad noise_sigma range");
  require(c.gamma > 0, "gen config: gamma must be positive");
  require(c.quantize_bits >= 1 && c.quantize_bits <= 16, "gen config: quantize_bits outside [1, 16]");
  require(range_ok(c.augment_scale, 1e-3, 1e3), "gen config: bad augment_scale range");
  require(c.mix_weight <= 1.0, "gen config: mix_weight above 1");
}

namespace io {

inline std::string gen_config_to_text(const GenConfig& c) {
  const auto r = [](const char* k, const Range& v) {
    return std::string(k) + "_min=" + format_double(v.lo) + "\n" + k + "_max=" + format_double(v.hi) + "\n";
  };
  std::string t;
  t += "crop_size=" + std::to_string(c.crop_size) + "\n";
  t += "n_inputs_min=" + std::to_string(c.n_inputs_min) + "\n";
  t += "n_inputs_max=" + std::to_string(c.n_inputs_max) + "\n";
  t += r("camera_distance", c.camera_distance);
  t += r("light_distance", c.light_distance);
  t += "fov_jitter_deg=" + format_double(c.fov_jitter_deg) + "\n";
  t += r("falloff", c.falloff);
  t += r("intensity_scale", c.intensity_scale);
  t += r("white_balance", c.white_balance);
  t += "ambient_probability=" + format_double(c.ambient_probability) + "\n";
  t += "ambient_max_fraction=" + format_double(c.ambient_max_fraction) + "\n";
  t += r("noise_sigma", c.noise_sigma);
  t += std::string("clip=") + (c.clip ? "true" : "false") + "\n";
  t += "gamma=" + format_double(c.gamma) + "\n";
  t += "quantize_bits=" + std::to_string(c.quantize_bits) + "\n";
  t += r("augment_scale", c.augment_scale);
  t += std::string("perturbations_enabled=") + (c.perturbations_enabled ? "true" : "false") + "\n";
  t += "mix_weight=" + format_double(c.mix_weight) + "\n";
  t += "seed=" + std::to_string(c.seed) + "\n";
  return t;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline GenConfig gen_config_from_key_values(const KeyValues& kv) {
  GenConfig c;
  KeyValues rest = kv;
  const auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = rest.find(key);
    if (it == rest.end()) return std::nullopt;
    std::string v = it->second;
    rest.erase(it);
    return v;
  };
  const auto num = [&](const std::string& key, double& out) {
    if (auto v = take(key)) out = parse_double(*v, key);
  };
  const auto integer = [&](const std::string& key, int& out) {
    if (auto v = take(key)) out = int(parse_int(*v, key));
  };
  const auto boolean = [&](const std::string& key, bool& out) {
    if (auto v = take(key)) out = parse_bool(*v, key);
  };
  const auto range = [&](const std::string& key, Range& out) {
    num(key + "_min", out.lo);
    num(key + "_max", out.hi);
  };
  integer("crop_size", c.crop_size);
  integer("n_inputs_min", c.n_inputs_min);
  integer("n_inputs_max", c.n_inputs_max);
  range("camera_distance", c.camera_distance);
  range("light_distance", c.light_distance);
  num("fov_jitter_deg", c.fov_jitter_deg);
  range("falloff", c.falloff);
  range("intensity_scale", c.intensity_scale);
  range("white_balance", c.white_balance);
  num("ambient_probability", c.ambient_probability);
  num("ambient_max_fraction", c.ambient_max_fraction);
  range("noise_sigma", c.noise_sigma);
  boolean("clip", c.clip);
  num("gamma", c.gamma);
  integer("quantize_bits", c.quantize_bits);
  range("augment_scale", c.augment_scale);
  boolean("perturbations_enabled", c.perturbations_enabled);
  num("mix_weight", c.mix_weight);
  if (auto v = take("seed")) c.seed = uint64_t(parse_int(*v, "seed"));
  if (!rest.empty()) fail(ErrorKind::usage, "gen config: unknown key '" + rest.begin()->first + "'");
  validate(c);
  return c;
}

}  // namespace io

/// Convex combination of two materials; normals are blended then
/// renormalized and roughness is re-clamped to the floor.
inline SvbrdfMaps mix_svbrdf(const SvbrdfMaps& a, const SvbrdfMaps& b, double w) {
  require(a.same_size(b), "mix_svbrdf: dimension mismatch");
  require(w >= 0.0 && w <= 1.0, "mix_svbrdf: weight outside [0, 1]");
  if (w == 1.0) return a;
  if (w == 0.0) return b;
  SvbrdfMaps out(a.width, a.height);
  const double v = 1.0 - w;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      const TexelParams ta = a.texel(x, y), tb = b.texel(x, y);
      TexelParams t;
      t.normal = normalize(ta.normal * w + tb.normal * v);
      t.diffuse = ta.diffuse * w + tb.diffuse * v;
      t.specular = ta.specular * w + tb.specular * v;
      t.roughness = std::max(kRoughnessMin, ta.roughness * w + tb.roughness * v);
      out.set_texel(x, y, t);
    }
  return out;
}

struct AugmentParams {
  double rotation = 0.0;  // radians
  double scale = 1.0;
  double origin_x = 0.0;  // source pixels
  double origin_y = 0.0;
  int crop_size = 64;

  bool operator==(const AugmentParams&) const = default;
};

namespace detail {

inline int wrap(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

/// Bilinear lookup with wrap-around tiling; (fx, fy) in continuous pixel
/// coordinates where texel centres sit at +0.5.
inline void sample_bilinear_wrap(const Image& img, double fx, double fy, double* out) {
  const double sx = fx - 0.5, sy = fy - 0.5;
  const double x0f = std::floor(sx), y0f = std::floor(sy);
  const double tx = sx - x0f, ty = sy - y0f;
  const int x0 = wrap(int(x0f), img.width()), x1 = wrap(int(x0f) + 1, img.width());
  const int y0 = wrap(int(y0f), img.height()), y1 = wrap(int(y0f) + 1, img.height());
  for (int c = 0; c < img.channels(); ++c) {
    const double top = (1.0 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
    const double bot = (1.0 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
    out[c] = (1.0 - ty) * top + ty * bot;
  }
}

}  // namespace detail

/// Rotates and scales the (tiled) source, then crops. Output pixel centre q
/// samples the source at origin + scale * R(-rotation) q; normals are
/// rotated in-plane by +rotation so shading stays consistent.
inline SvbrdfMaps augment_geometry(const SvbrdfMaps& maps, const AugmentParams& p) {
  check_shape(maps, "augment_geometry");
  require(p.crop_size >= 1 && p.scale > 0, "augment_geometry: bad crop size or scale");
  const int n = p.crop_size;
  const double c = std::cos(p.rotation), s = std::sin(p.rotation);
  SvbrdfMaps out(n, n);
  double buf[3];
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) {
      const double qx = u + 0.5, qy = v + 0.5;
      const double fx = p.origin_x + p.scale * (c * qx + s * qy);
      const double fy = p.origin_y + p.scale * (-s * qx + c * qy);
      TexelParams t;
      detail::sample_bilinear_wrap(maps.normal, fx, fy, buf);
      t.normal = normalize(Vec3{c * buf[0] - s * buf[1], s * buf[0] + c * buf[1], buf[2]});
      detail::sample_bilinear_wrap(maps.diffuse, fx, fy, buf);
      t.diffuse = {buf[0], buf[1], buf[2]};
      detail::sample_bilinear_wrap(maps.specular, fx, fy, buf);
      t.specular = {buf[0], buf[1], buf[2]};
      detail::sample_bilinear_wrap(maps.roughness, fx, fy, buf);
      t.roughness = std::clamp(buf[0], kRoughnessMin, 1.0);
      out.set_texel(u, v, t);
    }
  return out;
}

/// Cosine-weighted direction on the upper hemisphere (z > 0).
inline Vec3 sample_cosine_hemisphere(Rng& rng) {
  const double u1 = rng.uniform(), u2 = rng.uniform();
  const double r = std::sqrt(u1);
  const double phi = 2.0 * kPi * u2;
  return {r * std::cos(phi), r * std::sin(phi), std::sqrt(1.0 - u1)};
}

inline double log_uniform(Rng& rng, const Range& r) {
  return std::exp(rng.uniform(std::log(r.lo), std::log(r.hi)));
}

/// Flash intensity that renders a fronto-parallel Lambertian albedo at
/// roughly its own value from distance d.
inline double nominal_intensity(double d) { return kPi * d * d; }

/// Draws a camera and flash configuration (no ambient light). With
/// perturbations disabled, every perturbed quantity sits at its range
/// midpoint and only the hemisphere directions remain random.
inline SceneSample sample_scene(const GenConfig& cfg, Rng& rng) {
  const bool perturb = cfg.perturbations_enabled;
  SceneSample s;
  const Vec3 view_dir = sample_cosine_hemisphere(rng);
  double cam_dist = cfg.camera_distance.mid();
  s.fov_deg = 40.0;
  if (perturb) {
    cam_dist = rng.uniform(cfg.camera_distance.lo, cfg.camera_distance.hi);
    s.fov_deg = 40.0 + rng.uniform(-cfg.fov_jitter_deg, cfg.fov_jitter_deg);
    // Keep the sample's apparent size: wider lenses are held closer.
    cam_dist *= std::tan(20.0 * kPi / 180.0) / std::tan(0.5 * s.fov_deg * kPi / 180.0);
  }
  s.camera_pos = kPlaneCenter + view_dir * cam_dist;

  const Vec3 light_dir = sample_cosine_hemisphere(rng);
  double light_dist = cfg.light_distance.mid();
  double scale = 1.0;
  Rgb wb{1.0};
  s.falloff_exponent = cfg.falloff.mid();
  if (perturb) {
    light_dist = rng.uniform(cfg.light_distance.lo, cfg.light_distance.hi);
    s.falloff_exponent = rng.uniform(cfg.falloff.lo, cfg.falloff.hi);
    scale = log_uniform(rng, cfg.intensity_scale);
    for (int c = 0; c < 3; ++c) wb[c] = rng.uniform(cfg.white_balance.lo, cfg.white_balance.hi);
  }
  s.light_pos = kPlaneCenter + light_dir * light_dist;
  s.light_intensity = wb * (nominal_intensity(light_dist) * scale);
  return s;
}

/// Environment light shared by every view of one training material.
/// Disabled in the unperturbed (ablation) mode.
inline std::optional<AmbientLight> sample_ambient(const GenConfig& cfg, Rng& rng) {
  if (!cfg.perturbations_enabled) return std::nullopt;
  if (!(rng.uniform() < cfg.ambient_probability)) return std::nullopt;
  AmbientLight a;
  const double d = rng.uniform(cfg.light_distance.lo, cfg.light_distance.hi);
  a.pos = kPlaneCenter + sample_cosine_hemisphere(rng) * d;
  const double fraction = rng.uniform(0.0, cfg.ambient_max_fraction);
  Rgb color;
  for (int c = 0; c < 3; ++c) color[c] = rng.uniform(cfg.white_balance.lo, cfg.white_balance.hi);
  a.intensity = color * (nominal_intensity(d) * fraction);
  return a;
}

struct Observation {
  LdrImage image;
  SceneSample scene;
};

struct TrainingSample {
  SvbrdfMaps gt;
  std::vector<Observation> inputs;
  // Provenance of gt.
  int first = 0;
  int second = 0;
  double mix_weight = 1.0;
  AugmentParams augment;

  int count() const { return int(inputs.size()); }
};

/// Holds the material library and produces one fresh sample per iteration.
/// Samples are a pure function of (config, library, iteration).
class Generator {
public:
  Generator(GenConfig cfg, std::vector<SvbrdfMaps> library)
      : cfg_(std::move(cfg)), library_(std::move(library)) {
    validate(cfg_);
    if (library_.size() < 2)
      fail(ErrorKind::usage, "generator: need at least 2 base materials, got " +
                                 std::to_string(library_.size()));
    for (const auto& m : library_) check_shape(m, "generator");
  }

  const GenConfig& config() const { return cfg_; }
  const std::vector<SvbrdfMaps>& library() const { return library_; }

  AugmentParams draw_augment(Rng& rng, const SvbrdfMaps& src) const {
    AugmentParams a;
    a.rotation = rng.uniform(0.0, 2.0 * kPi);
    a.scale = log_uniform(rng, cfg_.augment_scale);
    a.origin_x = rng.uniform(0.0, double(src.width));
    a.origin_y = rng.uniform(0.0, double(src.height));
    a.crop_size = cfg_.crop_size;
    return a;
  }

  TrainingSample sample(uint64_t iteration) const {
    Rng rng(derive_seed(cfg_.seed, iteration));
    TrainingSample ts;
    const int n = int(library_.size());
    ts.first = rng.uniform_int(0, n - 1);
    ts.second = rng.uniform_int(0, n - 2);
    if (ts.second >= ts.first) ++ts.second;
    ts.mix_weight = cfg_.mix_weight >= 0 ? cfg_.mix_weight : rng.uniform();
    ts.augment = draw_augment(rng, library_[size_t(ts.first)]);
    // Both materials share one crop transform; augmenting before mixing
    // lets the library hold maps of different sizes.
    ts.gt = mix_svbrdf(augment_geometry(library_[size_t(ts.first)], ts.augment),
                       augment_geometry(library_[size_t(ts.second)], ts.augment), ts.mix_weight);

    const int count = rng.uniform_int(cfg_.n_inputs_min, cfg_.n_inputs_max);
    const std::optional<AmbientLight> ambient = sample_ambient(cfg_, rng);
    for (int k = 0; k < count; ++k) {
      SceneSample scene = sample_scene(cfg_, rng);
      scene.ambient = ambient;
      DegradeParams dp;
      dp.noise_sigma = rng.uniform(cfg_.noise_sigma.lo, cfg_.noise_sigma.hi);
      dp.clip = cfg_.clip;
      dp.gamma = cfg_.gamma;
      dp.quantize_bits = cfg_.quantize_bits;
      dp.seed = rng.next_u64();
      ts.inputs.push_back({degrade(render(ts.gt, scene), dp), scene});
    }
    return ts;
  }

private:
  GenConfig cfg_;
  std::vector<SvbrdfMaps> library_;
};

inline TrainingSample generate_sample(const GenConfig& cfg, const std::vector<SvbrdfMaps>& library,
                                      uint64_t iteration) {
  if (library.empty()) fail(ErrorKind::usage, "generate_sample: empty material library");
  return Generator(cfg, library).sample(iteration);
}

}  // namespace svbrdf
