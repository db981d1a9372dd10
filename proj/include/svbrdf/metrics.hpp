#pragma once

#include <functional>
#include <vector>

#include "svbrdf/io.hpp"
#include "svbrdf/loss.hpp"
#include "svbrdf/optimizer.hpp"
#include "svbrdf/renderer.hpp"
#include "svbrdf/synthesis.hpp"

namespace svbrdf {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

/// Normalized separable Gaussian weights, window x window, row-major.
inline std::vector<double> gaussian_window(const SsimParams& p) {
  require(p.window >= 1 && p.sigma > 0, "ssim: bad window");
  std::vector<double> g(size_t(p.window));
  const double mid = 0.5 * (p.window - 1);
  double s = 0;
  for (int i = 0; i < p.window; ++i) {
    g[size_t(i)] = std::exp(-(i - mid) * (i - mid) / (2 * p.sigma * p.sigma));
    s += g[size_t(i)];
  }
  std::vector<double> w(size_t(p.window) * p.window);
  for (int y = 0; y < p.window; ++y)
    for (int x = 0; x < p.window; ++x) w[size_t(y) * p.window + x] = g[size_t(y)] * g[size_t(x)] / (s * s);
  return w;
}

/// Mean local SSIM over all window positions fully inside the image,
/// averaged over channels.
inline double ssim(const Image& a, const Image& b, const SsimParams& p = {}) {
  require(a.same_shape(b), "ssim: dimension mismatch");
  require(p.k1 > 0 && p.k2 > 0, "ssim: k1 and k2 must be positive");
  require(a.width() >= p.window && a.height() >= p.window,
          "ssim: image smaller than the " + std::to_string(p.window) + "px window");
  const std::vector<double> w = gaussian_window(p);
  const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
  const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
  const int nx = a.width() - p.window + 1, ny = a.height() - p.window + 1;
  double total = 0;
  for (int c = 0; c < a.channels(); ++c) {
    double sum = 0;
    for (int oy = 0; oy < ny; ++oy)
      for (int ox = 0; ox < nx; ++ox) {
        double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
        for (int y = 0; y < p.window; ++y)
          for (int x = 0; x < p.window; ++x) {
            const double wk = w[size_t(y) * p.window + x];
            const double va = a.at(ox + x, oy + y, c), vb = b.at(ox + x, oy + y, c);
            ma += wk * va;
            mb += wk * vb;
            saa += wk * (va * va);
            sbb += wk * (vb * vb);
            sab += wk * (va * vb);
          }
        const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
        sum += ((2 * (ma * mb) + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      }
    total += sum / (double(nx) * ny);
  }
  return total / a.channels();
}

inline double rmse(const Image& a, const Image& b) {
  require(a.same_shape(b), "rmse: dimension mismatch");
  require(!a.empty(), "rmse: empty images");
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    s += d * d;
  }
  return std::sqrt(s / double(a.size()));
}

/// Display transform applied to renderings before comparison.
inline Image tone_map(const Image& radiance, double gamma = 2.2) {
  Image out = radiance;
  for (double& v : out.data()) v = std::pow(std::clamp(v, 0.0, 1.0), 1.0 / gamma);
  return out;
}

/// Normals remapped from [-1, 1] to [0, 1] for image metrics.
inline Image normal_display(const Image& normal) {
  Image out = normal;
  for (double& v : out.data()) v = 0.5 * (v + 1.0);
  return out;
}

enum Metric { kRender = 0, kNormal, kDiffuse, kRough, kSpec, kMetricCount };

inline constexpr const char* kMetricNames[kMetricCount] = {"render", "normal", "diffuse", "rough", "spec"};

struct EvalRow {
  int material = 0;
  int k = 0;
  std::array<double, kMetricCount> ssim{};
  std::array<double, kMetricCount> rmse{};
};

struct CurvePoint {
  int k = 0;
  double mean = 0, stderr_ = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<int> ks;

  /// Mean and standard error over materials for one metric, per k.
  std::vector<CurvePoint> curve(Metric m, bool use_ssim) const {
    std::vector<CurvePoint> out;
    for (int k : ks) {
      std::vector<double> v;
      for (const EvalRow& r : rows)
        if (r.k == k) v.push_back(use_ssim ? r.ssim[size_t(m)] : r.rmse[size_t(m)]);
      CurvePoint c{k, 0, 0};
      if (!v.empty()) {
        for (double x : v) c.mean += x / double(v.size());
        if (v.size() > 1) {
          double var = 0;
          for (double x : v) var += (x - c.mean) * (x - c.mean) / double(v.size() - 1);
          c.stderr_ = std::sqrt(var / double(v.size()));
        }
      }
      out.push_back(c);
    }
    return out;
  }
};

using Predictor = std::function<SvbrdfMaps(const std::vector<CalibratedInput>&)>;

struct EvalOptions {
  std::vector<int> ks{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int n_render = 50;
  GenConfig gen;  // view/light sampling and degradation of the inputs
  uint64_t seed = 0;
};

/// Calibrated observations of one material. Inputs for k views are the
/// first k of a fixed per-material sequence, so larger k only adds views.
inline std::vector<CalibratedInput> eval_inputs(const SvbrdfMaps& gt, const GenConfig& cfg, int count,
                                                uint64_t seed) {
  Rng rng(seed);
  const std::optional<AmbientLight> ambient = sample_ambient(cfg, rng);
  std::vector<CalibratedInput> out;
  for (int i = 0; i < count; ++i) {
    SceneSample s = sample_scene(cfg, rng);
    s.ambient = ambient;
    DegradeParams dp;
    dp.noise_sigma = rng.uniform(cfg.noise_sigma.lo, cfg.noise_sigma.hi);
    dp.clip = cfg.clip;
    dp.gamma = cfg.gamma;
    dp.quantize_bits = cfg.quantize_bits;
    dp.seed = rng.next_u64();
    out.push_back(calibrated_from_ldr(degrade(render(gt, s), dp), s, cfg.gamma));
  }
  return out;
}

inline EvalRow evaluate_prediction(const SvbrdfMaps& pred, const SvbrdfMaps& gt,
                                   const std::vector<SceneSample>& scenes, const SsimParams& sp = {}) {
  require(pred.same_size(gt), "evaluate: prediction size differs from ground truth");
  EvalRow r;
  for (const SceneSample& s : scenes) {
    const Image a = tone_map(render(pred, s)), b = tone_map(render(gt, s));
    r.ssim[kRender] += ssim(a, b, sp) / double(scenes.size());
    r.rmse[kRender] += rmse(a, b) / double(scenes.size());
  }
  const Image pn = normal_display(pred.normal), gn = normal_display(gt.normal);
  r.ssim[kNormal] = ssim(pn, gn, sp);
  r.rmse[kNormal] = rmse(pn, gn);
  r.ssim[kDiffuse] = ssim(pred.diffuse, gt.diffuse, sp);
  r.rmse[kDiffuse] = rmse(pred.diffuse, gt.diffuse);
  r.ssim[kRough] = ssim(pred.roughness, gt.roughness, sp);
  r.rmse[kRough] = rmse(pred.roughness, gt.roughness);
  r.ssim[kSpec] = ssim(pred.specular, gt.specular, sp);
  r.rmse[kSpec] = rmse(pred.specular, gt.specular);
  return r;
}

/// Number-of-inputs evaluation: for each material and k, predict from k
/// inputs and compare re-renderings under n_render shared scenes and maps.
inline EvalReport eval_curve(const Predictor& predictor, const std::vector<SvbrdfMaps>& testset,
                             const EvalOptions& opt) {
  if (testset.empty()) fail(ErrorKind::usage, "eval_curve: empty test set");
  require(!opt.ks.empty() && opt.n_render >= 1, "eval_curve: need k values and n_render >= 1");
  validate(opt.gen);
  int k_max = 0;
  for (int k : opt.ks) {
    require(k >= 1, "eval_curve: k must be >= 1");
    k_max = std::max(k_max, k);
  }
  EvalReport rep;
  rep.ks = opt.ks;
  for (size_t m = 0; m < testset.size(); ++m) {
    const SvbrdfMaps& gt = testset[m];
    const auto all = eval_inputs(gt, opt.gen, k_max, derive_seed(opt.seed, 2 * m));
    Rng srng(derive_seed(opt.seed, 2 * m + 1));
    const auto scenes = sample_loss_configs(opt.n_render, srng);
    for (int k : opt.ks) {
      const std::vector<CalibratedInput> in(all.begin(), all.begin() + k);
      EvalRow r = evaluate_prediction(predictor(in), gt, scenes);
      r.material = int(m);
      r.k = k;
      rep.rows.push_back(r);
    }
  }
  return rep;
}

namespace io {

inline std::string eval_csv(const EvalReport& rep) {
  std::string t = "material,k";
  for (const char* n : kMetricNames) t += std::string(",ssim_") + n;
  for (const char* n : kMetricNames) t += std::string(",rmse_") + n;
  t += "\n";
  for (const EvalRow& r : rep.rows) {
    t += std::to_string(r.material) + "," + std::to_string(r.k);
    for (double v : r.ssim) t += "," + format_double(v);
    for (double v : r.rmse) t += "," + format_double(v);
    t += "\n";
  }
  return t;
}

/// One "k,mean,stderr" table per metric, keyed by file stem.
inline std::vector<std::pair<std::string, std::string>> eval_plot_data(const EvalReport& rep) {
  std::vector<std::pair<std::string, std::string>> out;
  for (int use_ssim = 1; use_ssim >= 0; --use_ssim)
    for (int m = 0; m < kMetricCount; ++m) {
      std::string t = "k,mean,stderr\n";
      for (const CurvePoint& c : rep.curve(Metric(m), use_ssim))
        t += std::to_string(c.k) + "," + format_double(c.mean) + "," + format_double(c.stderr_) + "\n";
      out.emplace_back(std::string(use_ssim ? "ssim_" : "rmse_") + kMetricNames[m], t);
    }
  return out;
}

}  // namespace io

}  // namespace svbrdf
