#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "svbrdf/common.hpp"
#include "svbrdf/loss.hpp"
#include "svbrdf/material.hpp"
#include "svbrdf/renderer.hpp"

namespace svbrdf {

struct AdamHyper {
  double lr = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam moments for a flat parameter vector.
struct AdamState {
  std::vector<double> m, v;
  long long step_count = 0;
  AdamHyper hyper;

  AdamState() = default;
  AdamState(size_t n, AdamHyper h) : m(n, 0.0), v(n, 0.0), hyper(h) {}

  void step(std::span<double> params, std::span<const double> grad) {
    require(params.size() == m.size() && grad.size() == m.size(), "adam: shape mismatch");
    for (size_t i = 0; i < grad.size(); ++i)
      if (!std::isfinite(grad[i]))
        fail(ErrorKind::numerical, "adam: non-finite gradient at index " + std::to_string(i));
    ++step_count;
    const double c1 = 1.0 - std::pow(hyper.beta1, double(step_count));
    const double c2 = 1.0 - std::pow(hyper.beta2, double(step_count));
    for (size_t i = 0; i < grad.size(); ++i) {
      const double g = grad[i];
      m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
      v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      params[i] -= hyper.lr * mhat / (std::sqrt(vhat) + hyper.eps);
    }
  }
};

/// Unconstrained optimization variables in the param:: layout: slopes as
/// is, albedos and roughness as logits.
struct OptState {
  Image u;
  AdamState adam;

  OptState() = default;
  explicit OptState(Image params, AdamHyper h = {})
      : u(std::move(params)), adam(u.size(), h) {
    require(u.channels() == param::kCount, "opt state: need 9 parameter channels");
  }

  long long step_count() const { return adam.step_count; }
};

inline OptState adam_step(OptState s, const Image& grad) {
  require(grad.same_shape(s.u), "adam_step: gradient shape does not match parameters");
  s.adam.step(s.u.data(), grad.data());
  return s;
}

inline double decode_roughness(double logit_value) {
  return kRoughnessMin + (1.0 - kRoughnessMin) * sigmoid(logit_value);
}

inline SvbrdfMaps decode_params(const Image& u) {
  require(u.channels() == param::kCount, "decode_params: need 9 channels");
  SvbrdfMaps m(u.width(), u.height());
  for (int y = 0; y < u.height(); ++y)
    for (int x = 0; x < u.width(); ++x) {
      const auto p = u.pixel(x, y);
      TexelParams t;
      t.normal = normal_from_slopes(p[param::kSlopeX], p[param::kSlopeY]);
      for (int c = 0; c < 3; ++c) {
        t.diffuse[c] = sigmoid(p[param::kDiffuse + c]);
        t.specular[c] = sigmoid(p[param::kSpecular + c]);
      }
      t.roughness = decode_roughness(p[param::kRoughness]);
      m.set_texel(x, y, t);
    }
  return m;
}

/// Maps a gradient with respect to the decoded maps back onto u.
inline Image decode_params_vjp(const Image& u, const Image& grad_maps) {
  require(grad_maps.same_shape(u), "decode_params_vjp: shape mismatch");
  Image g = grad_maps;
  for (int y = 0; y < u.height(); ++y)
    for (int x = 0; x < u.width(); ++x) {
      const auto p = u.pixel(x, y);
      auto gp = g.pixel(x, y);
      for (int k = param::kDiffuse; k < param::kRoughness; ++k) {
        const double s = sigmoid(p[k]);
        gp[k] *= s * (1.0 - s);
      }
      const double s = sigmoid(p[param::kRoughness]);
      gp[param::kRoughness] *= (1.0 - kRoughnessMin) * s * (1.0 - s);
    }
  return g;
}

/// Inverse of decode_params; saturated values are pulled in by 1e-12.
inline Image encode_params(const SvbrdfMaps& maps) {
  const auto safe_logit = [](double p) { return logit(std::clamp(p, 1e-12, 1.0 - 1e-12)); };
  Image u = to_param_image(maps);
  for (int y = 0; y < u.height(); ++y)
    for (int x = 0; x < u.width(); ++x) {
      auto p = u.pixel(x, y);
      for (int k = param::kDiffuse; k < param::kRoughness; ++k) p[k] = safe_logit(p[k]);
      p[param::kRoughness] =
          safe_logit((p[param::kRoughness] - kRoughnessMin) / (1.0 - kRoughnessMin));
    }
  return u;
}

/// A photograph with exactly known capture geometry, already linearized.
/// Pixels at or above `saturation` were clipped by the sensor.
struct CalibratedInput {
  RadianceImage linear;
  SceneSample scene;
  double saturation = std::numeric_limits<double>::infinity();
};

inline CalibratedInput calibrated_from_ldr(const LdrImage& image, const SceneSample& scene,
                                           double gamma = 2.2) {
  return {invert_gamma(image, gamma), scene, 1.0};
}

/// The rendering as the sensor would record it: where the observation is
/// clipped, anything at or above the clip level matches it.
inline Image as_recorded(const RadianceImage& render, const CalibratedInput& in) {
  Image r = render;
  for (size_t i = 0; i < r.size(); ++i)
    if (in.linear.data()[i] >= in.saturation && r.data()[i] >= in.saturation) r.data()[i] = in.linear.data()[i];
  return r;
}

/// Roughness logit used for the "roughness at zero" start. Zero is below the
/// representable floor, so the start sits just above it.
inline const double kRoughnessInitLogit = logit(1e-3);

/// Index of the input whose view direction is closest to the plane normal.
inline size_t most_fronto_parallel(const std::vector<CalibratedInput>& inputs) {
  size_t best = 0;
  double best_z = -2.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const double z = normalize(inputs[i].scene.camera_pos - kPlaneCenter).z;
    if (z > best_z) {
      best_z = z;
      best = i;
    }
  }
  return best;
}

/// Diffuse from the most fronto-parallel input, flat normals, roughness at
/// the floor, specular gray (0.5).
inline OptState init_state(const std::vector<CalibratedInput>& inputs, AdamHyper hyper = {}) {
  if (inputs.empty()) fail(ErrorKind::usage, "init_state: no inputs");
  const RadianceImage& src = inputs[most_fronto_parallel(inputs)].linear;
  require(src.channels() == 3, "init_state: inputs must be RGB");
  Image u(src.width(), src.height(), param::kCount);
  for (int y = 0; y < u.height(); ++y)
    for (int x = 0; x < u.width(); ++x) {
      auto p = u.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        p[param::kDiffuse + c] = logit(std::clamp(src.at(x, y, c), 1e-3, 1.0 - 1e-3));
        p[param::kSpecular + c] = 0.0;
      }
      p[param::kRoughness] = kRoughnessInitLogit;
    }
  return OptState(std::move(u), hyper);
}

struct TraceRow {
  long long iteration = 0;
  double objective = 0.0;
  double tv = 0.0;
  double render = 0.0;
};

struct Objective {
  TraceRow terms;
  Image grad_u;
};

/// Mean log-l1 re-rendering error over the inputs (clipped pixels only
/// penalize renders below the clip level) plus tv_weight * TV, and
/// its gradient with respect to u.
inline Objective evaluate_objective(const Image& u, const std::vector<CalibratedInput>& inputs,
                                    const LossWeights& w) {
  const SvbrdfMaps maps = decode_params(u);
  Image grad(u.width(), u.height(), param::kCount);
  double render_term = 0.0;
  const double per_input = 1.0 / double(inputs.size());
  for (const CalibratedInput& in : inputs) {
    require(in.linear.width() == u.width() && in.linear.height() == u.height(),
            "optimize: input dimensions differ from the target maps");
    const LogL1 l = log_l1(as_recorded(render(maps, in.scene), in), in.linear, w.log_eps, per_input);
    render_term += l.value;
    accumulate(grad, render_grad(maps, in.scene, l.d_a));
  }
  Objective out;
  out.terms.render = render_term;
  if (w.tv_weight > 0.0) {
    const LossValue tv = tv_loss(maps);
    out.terms.tv = tv.value;
    accumulate(grad, tv.grad, w.tv_weight);
  }
  out.terms.objective = render_term + w.tv_weight * out.terms.tv;
  out.grad_u = decode_params_vjp(u, grad);
  return out;
}

struct OptimizeOptions {
  AdamHyper hyper;
  int callback_every = 0;  // 0 disables the callback
  std::function<void(long long iteration, const SvbrdfMaps&)> callback;
};

struct OptimizeResult {
  SvbrdfMaps maps;
  std::vector<TraceRow> trace;  // objective before each step
  OptState state;
};

/// Runs `iters` Adam steps from `state`. The loss configurations are the
/// calibrated input scenes themselves.
inline OptimizeResult optimize_from(OptState state, const std::vector<CalibratedInput>& inputs,
                                    const LossWeights& weights, int iters,
                                    const OptimizeOptions& opts = {}) {
  if (inputs.empty()) fail(ErrorKind::usage, "optimize: no inputs");
  require(iters >= 1, "optimize: iters must be >= 1");
  validate(weights);
  OptimizeResult res;
  res.trace.reserve(size_t(iters));
  for (int it = 0; it < iters; ++it) {
    Objective obj = evaluate_objective(state.u, inputs, weights);
    obj.terms.iteration = it;
    if (!std::isfinite(obj.terms.objective))
      fail(ErrorKind::numerical, "optimize: non-finite objective at iteration " + std::to_string(it));
    res.trace.push_back(obj.terms);
    state.adam.step(state.u.data(), obj.grad_u.data());
    if (opts.callback && opts.callback_every > 0 && (it + 1) % opts.callback_every == 0)
      opts.callback(it + 1, decode_params(state.u));
  }
  res.maps = decode_params(state.u);
  res.state = std::move(state);
  return res;
}

inline OptimizeResult optimize(const std::vector<CalibratedInput>& inputs, const LossWeights& weights,
                               int iters, const OptimizeOptions& opts = {}) {
  return optimize_from(init_state(inputs, opts.hyper), inputs, weights, iters, opts);
}

}  // namespace svbrdf
