#pragma once

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <vector>

#include "svbrdf/loss.hpp"
#include "svbrdf/material.hpp"
#include "svbrdf/nn.hpp"
#include "svbrdf/optimizer.hpp"
#include "svbrdf/synthesis.hpp"

// Order-invariant multi-image SVBRDF network. Each input runs through the
// same U-Net with a global track; per-pixel, per-channel maxima over the
// inputs are decoded by three convolutions into the four maps.

namespace svbrdf {

struct NetConfig {
  int input_size = 64;
  int depth = 4;
  int base_channels = 16;
  int feature_channels = 64;
  int global_dim = 32;
  int joint_channels = 32;
  double leaky_slope = 0.2;
  double slope_scale = 4.0;  // output slopes are slope_scale * tanh(z)

  static constexpr int kInputChannels = 5;  // linear RGB + x, y coordinates
  static constexpr int kOutChannels = param::kCount;

  /// Encoder width at level k (level 0 is the input).
  int channels(int k) const {
    return k == 0 ? kInputChannels : std::min(base_channels << (k - 1), 512);
  }
  int bottleneck_size() const { return input_size >> depth; }

  bool operator==(const NetConfig&) const = default;
};

inline void validate(const NetConfig& c) {
  require(c.depth >= 1 && c.depth <= 10, "net config: depth must lie in [1, 10]");
  require(c.input_size >= 2 && c.input_size % (1 << c.depth) == 0,
          "net config: input_size must be divisible by 2^depth");
  require(c.base_channels >= 1 && c.global_dim >= 1 && c.joint_channels >= 1,
          "net config: channel counts must be positive");
  require(c.feature_channels == 64, "net config: feature_channels must be 64");
  require(c.leaky_slope >= 0 && c.leaky_slope < 1, "net config: leaky_slope outside [0, 1)");
  require(c.slope_scale > 0, "net config: slope_scale must be positive");
}

class FusionNet {
public:
  FusionNet() = default;

  /// Builds the topology; weights uniform in +-sqrt(1/fan_in), biases zero.
  explicit FusionNet(const NetConfig& cfg, uint64_t seed = 0) : cfg_(cfg) {
    validate(cfg_);
    size_t off = 0;
    const auto conv = [&](int in, int out, int stride) {
      nn::Conv3x3 c{in, out, stride, off, off + size_t(out) * in * 9};
      off += c.param_count();
      return c;
    };
    const auto linear = [&](int in, int out) {
      nn::Linear l{in, out, off, off + size_t(out) * in};
      off += l.param_count();
      return l;
    };
    const int D = cfg_.depth;
    for (int k = 1; k <= D; ++k) enc_.push_back(conv(cfg_.channels(k - 1), cfg_.channels(k), 2));
    fc_global_ = linear(cfg_.channels(D), cfg_.global_dim);
    fc_inject_ = linear(cfg_.global_dim, cfg_.channels(D));
    dec_.resize(size_t(D));
    for (int k = D; k >= 1; --k)
      dec_[size_t(k - 1)] = conv(cfg_.channels(k) + cfg_.channels(k - 1),
                                 k == 1 ? cfg_.feature_channels : cfg_.channels(k - 1), 1);
    fc_joint_ = linear(cfg_.global_dim, cfg_.feature_channels);
    joint_[0] = conv(cfg_.feature_channels, cfg_.joint_channels, 1);
    joint_[1] = conv(cfg_.joint_channels, cfg_.joint_channels, 1);
    joint_[2] = conv(cfg_.joint_channels, NetConfig::kOutChannels, 1);
    params_.assign(off, 0.0);
    init_weights(seed);
  }

  const NetConfig& config() const { return cfg_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  size_t param_count() const { return params_.size(); }

  void init_weights(uint64_t seed) {
    Rng rng(seed);
    std::fill(params_.begin(), params_.end(), 0.0);
    const auto fill = [&](size_t off, size_t n, int fan_in) {
      const double a = std::sqrt(1.0 / fan_in);
      for (size_t i = 0; i < n; ++i) params_[off + i] = rng.uniform(-a, a);
    };
    // Documented layer order: encoder, global FCs, decoder (deepest first),
    // joint FC, joint convolutions.
    for (const auto& c : enc_) fill(c.w_off, c.weight_count(), c.fan_in());
    fill(fc_global_.w_off, size_t(fc_global_.out) * fc_global_.in, fc_global_.fan_in());
    fill(fc_inject_.w_off, size_t(fc_inject_.out) * fc_inject_.in, fc_inject_.fan_in());
    for (int k = cfg_.depth; k >= 1; --k) {
      const auto& c = dec_[size_t(k - 1)];
      fill(c.w_off, c.weight_count(), c.fan_in());
    }
    fill(fc_joint_.w_off, size_t(fc_joint_.out) * fc_joint_.in, fc_joint_.fan_in());
    for (const auto& c : joint_) fill(c.w_off, c.weight_count(), c.fan_in());
  }

  const std::vector<nn::Conv3x3>& encoder() const { return enc_; }
  const std::vector<nn::Conv3x3>& decoder() const { return dec_; }
  const nn::Linear& fc_global() const { return fc_global_; }
  const nn::Linear& fc_inject() const { return fc_inject_; }
  const nn::Linear& fc_joint() const { return fc_joint_; }
  const std::array<nn::Conv3x3, 3>& joint() const { return joint_; }

private:
  NetConfig cfg_;
  std::vector<double> params_;
  std::vector<nn::Conv3x3> enc_, dec_;
  nn::Linear fc_global_, fc_inject_, fc_joint_;
  std::array<nn::Conv3x3, 3> joint_;
};

/// Network input: linear RGB followed by x and y coordinates in [-1, 1].
inline nn::Tensor make_input(const Image& linear) {
  require(linear.channels() == 3, "network input must be RGB");
  const int w = linear.width(), h = linear.height();
  nn::Tensor t(NetConfig::kInputChannels, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) t.at(c, y, x) = linear.at(x, y, c);
      t.at(3, y, x) = 2.0 * (x + 0.5) / w - 1.0;
      t.at(4, y, x) = 2.0 * (y + 0.5) / h - 1.0;
    }
  return t;
}

/// Intermediate values of one single-image track, kept for backprop.
struct TrackCache {
  std::vector<nn::Tensor> e;       // e[0] input, e[k] encoder output at level k
  std::vector<nn::Tensor> enc_n;   // normalized encoder pre-activations
  std::vector<nn::InstanceNormCache> enc_norm;
  std::vector<double> mean, global_pre, global;
  std::vector<nn::Tensor> cat;     // decoder conv inputs, per level
  std::vector<nn::Tensor> dec_n;   // decoder pre-activations (normalized for k > 1)
  std::vector<nn::InstanceNormCache> dec_norm;
  nn::Tensor features;
};

struct TrackOutput {
  nn::Tensor features;
  std::vector<double> global;
};

inline TrackOutput single_image_track(const FusionNet& net, const nn::Tensor& input,
                                      TrackCache* cache = nullptr) {
  const NetConfig& cfg = net.config();
  require(input.c == NetConfig::kInputChannels, "single_image_track: expected 5 input channels");
  require(input.h == cfg.input_size && input.w == cfg.input_size,
          "single_image_track: input size " + std::to_string(input.w) + "x" + std::to_string(input.h) +
              " does not match network input_size " + std::to_string(cfg.input_size));
  const auto& P = net.params();
  const double slope = cfg.leaky_slope;
  const int D = cfg.depth;
  TrackCache local;
  TrackCache& c = cache ? *cache : local;
  c.e.assign(size_t(D + 1), {});
  c.enc_n.assign(size_t(D + 1), {});
  c.enc_norm.assign(size_t(D + 1), {});
  c.cat.assign(size_t(D + 1), {});
  c.dec_n.assign(size_t(D + 1), {});
  c.dec_norm.assign(size_t(D + 1), {});

  c.e[0] = input;
  for (int k = 1; k <= D; ++k) {
    const nn::Tensor pre = net.encoder()[size_t(k - 1)].forward(P, c.e[size_t(k - 1)]);
    c.enc_n[size_t(k)] = nn::instance_norm(pre, c.enc_norm[size_t(k)]);
    c.e[size_t(k)] = nn::leaky_relu(c.enc_n[size_t(k)], slope);
  }
  c.mean = nn::spatial_mean(c.e[size_t(D)]);
  c.global_pre = net.fc_global().forward(P, c.mean);
  c.global = nn::leaky_relu(c.global_pre, slope);
  nn::Tensor d = nn::add_broadcast(c.e[size_t(D)], net.fc_inject().forward(P, c.global));
  for (int k = D; k >= 1; --k) {
    c.cat[size_t(k)] = nn::concat(nn::upsample2(d), c.e[size_t(k - 1)]);
    const nn::Tensor pre = net.decoder()[size_t(k - 1)].forward(P, c.cat[size_t(k)]);
    c.dec_n[size_t(k)] = k > 1 ? nn::instance_norm(pre, c.dec_norm[size_t(k)]) : pre;
    d = nn::leaky_relu(c.dec_n[size_t(k)], slope);
  }
  c.features = d;
  return {std::move(d), c.global};
}

/// Gradient of one track given gradients on its features and global vector.
inline void single_image_track_backward(const FusionNet& net, const TrackCache& c,
                                        const nn::Tensor& d_features, const std::vector<double>& d_global,
                                        std::span<double> grads) {
  const auto& P = net.params();
  const double slope = net.config().leaky_slope;
  const int D = net.config().depth;
  std::vector<nn::Tensor> de(size_t(D + 1));
  for (int k = 0; k <= D; ++k) de[size_t(k)] = nn::Tensor(c.e[size_t(k)].c, c.e[size_t(k)].h, c.e[size_t(k)].w);
  const auto add = [](nn::Tensor& into, const nn::Tensor& g) {
    for (size_t i = 0; i < into.v.size(); ++i) into.v[i] += g.v[i];
  };

  nn::Tensor g = d_features;
  for (int k = 1; k <= D; ++k) {
    nn::Tensor dpre = nn::leaky_relu_backward(c.dec_n[size_t(k)], g, slope);
    if (k > 1) dpre = nn::instance_norm_backward(c.dec_norm[size_t(k)], dpre);
    const nn::Tensor dcat = net.decoder()[size_t(k - 1)].backward(P, grads, c.cat[size_t(k)], dpre);
    auto [du, dskip] = nn::split(dcat, c.cat[size_t(k)].c - c.e[size_t(k - 1)].c);
    add(de[size_t(k - 1)], dskip);
    g = nn::upsample2_backward(du);
  }
  // g is now the gradient on e[D] + inject(global).
  add(de[size_t(D)], g);
  std::vector<double> dglobal = net.fc_inject().backward(P, grads, c.global, nn::spatial_sum(g));
  for (size_t i = 0; i < dglobal.size(); ++i) dglobal[i] += d_global[i];
  const std::vector<double> dgpre = nn::leaky_relu_backward(c.global_pre, dglobal, slope);
  const std::vector<double> dmean = net.fc_global().backward(P, grads, c.mean, dgpre);
  {
    nn::Tensor& t = de[size_t(D)];
    const double inv = 1.0 / double(t.plane());
    for (int ch = 0; ch < t.c; ++ch) {
      double* p = t.channel(ch);
      for (size_t i = 0; i < t.plane(); ++i) p[i] += dmean[size_t(ch)] * inv;
    }
  }
  for (int k = D; k >= 1; --k) {
    const nn::Tensor dn = nn::leaky_relu_backward(c.enc_n[size_t(k)], de[size_t(k)], slope);
    const nn::Tensor dpre = nn::instance_norm_backward(c.enc_norm[size_t(k)], dn);
    const nn::Tensor dx = net.encoder()[size_t(k - 1)].backward(P, grads, c.e[size_t(k - 1)], dpre);
    if (k > 1) add(de[size_t(k - 1)], dx);
  }
}

struct Fused {
  nn::Tensor features;
  std::vector<double> global;
  // Index of the contributing input per element; lowest index on ties.
  std::vector<int> feature_src, global_src;
};

inline Fused fuse_max(const std::vector<nn::Tensor>& features, const std::vector<std::vector<double>>& globals) {
  if (features.empty()) fail(ErrorKind::usage, "fuse_max: empty input list");
  require(globals.size() == features.size(), "fuse_max: feature and global counts differ");
  Fused f{features[0], globals[0], std::vector<int>(features[0].v.size(), 0),
          std::vector<int>(globals[0].size(), 0)};
  for (size_t i = 1; i < features.size(); ++i) {
    require(features[i].same_shape(f.features) && globals[i].size() == f.global.size(),
            "fuse_max: shape mismatch");
    for (size_t j = 0; j < f.features.v.size(); ++j)
      if (features[i].v[j] > f.features.v[j]) {
        f.features.v[j] = features[i].v[j];
        f.feature_src[j] = int(i);
      }
    for (size_t j = 0; j < f.global.size(); ++j)
      if (globals[i][j] > f.global[j]) {
        f.global[j] = globals[i][j];
        f.global_src[j] = int(i);
      }
  }
  return f;
}

struct JointCache {
  nn::Tensor h0, a1, h1, a2, h2, z;
};

/// Maps the raw 9-channel output to valid maps.
inline SvbrdfMaps activate_output(const nn::Tensor& z, double slope_scale) {
  require(z.c == NetConfig::kOutChannels, "activate_output: expected 9 channels");
  SvbrdfMaps m(z.w, z.h);
  for (int y = 0; y < z.h; ++y)
    for (int x = 0; x < z.w; ++x) {
      TexelParams t;
      t.normal = normal_from_slopes(slope_scale * std::tanh(z.at(param::kSlopeX, y, x)),
                                    slope_scale * std::tanh(z.at(param::kSlopeY, y, x)));
      for (int c = 0; c < 3; ++c) {
        t.diffuse[c] = sigmoid(z.at(param::kDiffuse + c, y, x));
        t.specular[c] = sigmoid(z.at(param::kSpecular + c, y, x));
      }
      t.roughness = decode_roughness(z.at(param::kRoughness, y, x));
      m.set_texel(x, y, t);
    }
  return m;
}

/// Gradient on the raw output from a gradient in the param:: layout.
inline nn::Tensor activate_output_backward(const nn::Tensor& z, const Image& upstream, double slope_scale) {
  require(upstream.channels() == param::kCount && upstream.width() == z.w && upstream.height() == z.h,
          "network backward: upstream gradient must be 9-channel and match the output size");
  nn::Tensor dz(z.c, z.h, z.w);
  for (int y = 0; y < z.h; ++y)
    for (int x = 0; x < z.w; ++x)
      for (int k = 0; k < param::kCount; ++k) {
        const double v = z.at(k, y, x), g = upstream.at(x, y, k);
        double d;
        if (k <= param::kSlopeY) {
          const double t = std::tanh(v);
          d = slope_scale * (1.0 - t * t);
        } else {
          const double s = sigmoid(v);
          d = s * (1.0 - s) * (k == param::kRoughness ? 1.0 - kRoughnessMin : 1.0);
        }
        dz.at(k, y, x) = g * d;
      }
  return dz;
}

inline SvbrdfMaps joint_decode(const FusionNet& net, const nn::Tensor& features, const std::vector<double>& global,
                               JointCache* cache = nullptr) {
  const NetConfig& cfg = net.config();
  require(features.c == cfg.feature_channels && features.h == cfg.input_size && features.w == cfg.input_size,
          "joint_decode: fused feature shape mismatch");
  require(int(global.size()) == cfg.global_dim, "joint_decode: fused global size mismatch");
  const auto& P = net.params();
  JointCache local;
  JointCache& c = cache ? *cache : local;
  c.h0 = nn::add_broadcast(features, net.fc_joint().forward(P, global));
  c.a1 = net.joint()[0].forward(P, c.h0);
  c.h1 = nn::leaky_relu(c.a1, cfg.leaky_slope);
  c.a2 = net.joint()[1].forward(P, c.h1);
  c.h2 = nn::leaky_relu(c.a2, cfg.leaky_slope);
  c.z = net.joint()[2].forward(P, c.h2);
  return activate_output(c.z, cfg.slope_scale);
}

/// Everything computed by a forward pass over a set of inputs.
struct ForwardPass {
  std::vector<TrackCache> tracks;
  Fused fused;
  JointCache joint;
  SvbrdfMaps maps;
};

inline ForwardPass forward_pass(const FusionNet& net, const std::vector<Image>& linear_images) {
  if (linear_images.empty()) fail(ErrorKind::usage, "network forward: empty image list");
  ForwardPass pass;
  const int n = int(linear_images.size());
  pass.tracks.resize(size_t(n));
  std::vector<nn::Tensor> feats(static_cast<size_t>(n));
  std::vector<std::vector<double>> globals(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    TrackOutput o = single_image_track(net, make_input(linear_images[size_t(i)]), &pass.tracks[size_t(i)]);
    feats[size_t(i)] = std::move(o.features);
    globals[size_t(i)] = std::move(o.global);
  }
  pass.fused = fuse_max(feats, globals);
  pass.maps = joint_decode(net, pass.fused.features, pass.fused.global, &pass.joint);
  return pass;
}

inline SvbrdfMaps forward(const FusionNet& net, const std::vector<Image>& linear_images) {
  return forward_pass(net, linear_images).maps;
}

/// Weight gradients for an upstream gradient on the output maps in the
/// param:: layout. Max fusion routes each element to its recorded source.
inline std::vector<double> backward(const FusionNet& net, const ForwardPass& pass, const Image& upstream) {
  const NetConfig& cfg = net.config();
  const auto& P = net.params();
  std::vector<double> grads(net.param_count(), 0.0);
  const JointCache& j = pass.joint;
  const nn::Tensor dz = activate_output_backward(j.z, upstream, cfg.slope_scale);
  const nn::Tensor dh2 = net.joint()[2].backward(P, grads, j.h2, dz);
  const nn::Tensor da2 = nn::leaky_relu_backward(j.a2, dh2, cfg.leaky_slope);
  const nn::Tensor dh1 = net.joint()[1].backward(P, grads, j.h1, da2);
  const nn::Tensor da1 = nn::leaky_relu_backward(j.a1, dh1, cfg.leaky_slope);
  const nn::Tensor dF = net.joint()[0].backward(P, grads, j.h0, da1);
  const std::vector<double> dG = net.fc_joint().backward(P, grads, pass.fused.global, nn::spatial_sum(dF));

  for (size_t i = 0; i < pass.tracks.size(); ++i) {
    nn::Tensor df(dF.c, dF.h, dF.w);
    bool any = false;
    for (size_t k = 0; k < df.v.size(); ++k)
      if (pass.fused.feature_src[k] == int(i)) {
        df.v[k] = dF.v[k];
        any = true;
      }
    std::vector<double> dg(dG.size(), 0.0);
    for (size_t k = 0; k < dg.size(); ++k)
      if (pass.fused.global_src[k] == int(i)) {
        dg[k] = dG[k];
        any = true;
      }
    if (any) single_image_track_backward(net, pass.tracks[i], df, dg, grads);
  }
  return grads;
}

inline std::vector<double> backward(const FusionNet& net, const std::vector<Image>& linear_images,
                                    const Image& upstream) {
  return backward(net, forward_pass(net, linear_images), upstream);
}

namespace io {

inline constexpr char kCheckpointMagic[4] = {'S', 'V', 'F', 'N'};
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  uint64_t take(int bytes) {
    if (pos + size_t(bytes) > buf.size()) fail(ErrorKind::io, "checkpoint: truncated file");
    uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= uint64_t(uint8_t(buf[pos + size_t(i)])) << (8 * i);
    pos += size_t(bytes);
    return v;
  }
};

}  // namespace detail

/// Layout: "SVFN", u32 version, u32 input_size, depth, base_channels,
/// feature_channels, global_dim, joint_channels, f64 leaky_slope,
/// slope_scale, u64 parameter count, then little-endian f32 parameters in
/// the layer order of FusionNet::init_weights.
inline void save_checkpoint(const fs::path& path, const FusionNet& net) {
  const NetConfig& c = net.config();
  std::string out(kCheckpointMagic, 4);
  detail::put_u32(out, kCheckpointVersion);
  for (int v : {c.input_size, c.depth, c.base_channels, c.feature_channels, c.global_dim, c.joint_channels})
    detail::put_u32(out, uint32_t(v));
  detail::put_f64(out, c.leaky_slope);
  detail::put_f64(out, c.slope_scale);
  detail::put_u64(out, net.param_count());
  for (double p : net.params()) detail::put_u32(out, std::bit_cast<uint32_t>(float(p)));
  write_text(path, out);
}

inline FusionNet load_checkpoint(const fs::path& path) {
  const std::string buf = read_text(path);
  if (buf.size() < 4 || std::memcmp(buf.data(), kCheckpointMagic, 4) != 0)
    fail(ErrorKind::io, "checkpoint: bad magic in " + path.string());
  detail::Reader r{buf, 4};
  const uint32_t version = uint32_t(r.take(4));
  if (version != kCheckpointVersion)
    fail(ErrorKind::io, "checkpoint: unsupported version " + std::to_string(version));
  NetConfig c;
  c.input_size = int(r.take(4));
  c.depth = int(r.take(4));
  c.base_channels = int(r.take(4));
  c.feature_channels = int(r.take(4));
  c.global_dim = int(r.take(4));
  c.joint_channels = int(r.take(4));
  c.leaky_slope = std::bit_cast<double>(r.take(8));
  c.slope_scale = std::bit_cast<double>(r.take(8));
  FusionNet net(c);
  const uint64_t n = r.take(8);
  if (n != net.param_count())
    fail(ErrorKind::io, "checkpoint: parameter count " + std::to_string(n) + " does not match topology (" +
                            std::to_string(net.param_count()) + ")");
  for (double& p : net.params()) p = double(std::bit_cast<float>(uint32_t(r.take(4))));
  if (r.pos != buf.size()) fail(ErrorKind::io, "checkpoint: trailing bytes");
  return net;
}

}  // namespace io

struct TrainOptions {
  int batch_size = 2;
  AdamHyper hyper;
  uint64_t seed = 0;  // loss configuration stream
  std::function<void(int iteration, double loss)> callback;
};

/// Linearized network inputs of a training sample.
inline std::vector<Image> linear_inputs(const TrainingSample& s, double gamma) {
  std::vector<Image> out;
  out.reserve(s.inputs.size());
  for (const Observation& o : s.inputs) out.push_back(invert_gamma(o.image, gamma));
  return out;
}

/// Adam on total_loss over generator samples; returns the mean batch loss
/// per iteration. Iteration i consumes samples i*batch .. i*batch+batch-1.
inline std::vector<double> toy_train(FusionNet& net, const Generator& gen, const LossWeights& w, int iters,
                                     const TrainOptions& opts = {}) {
  validate(w);
  require(iters >= 0, "toy_train: iters must be >= 0");
  require(opts.batch_size >= 1, "toy_train: batch_size must be >= 1");
  require(gen.config().crop_size == net.config().input_size,
          "toy_train: generator crop_size must equal network input_size");
  AdamState adam(net.param_count(), opts.hyper);
  std::vector<double> trace;
  trace.reserve(size_t(iters));
  const double inv_batch = 1.0 / opts.batch_size;
  for (int it = 0; it < iters; ++it) {
    std::vector<double> grads(net.param_count(), 0.0);
    double loss = 0.0;
    for (int b = 0; b < opts.batch_size; ++b) {
      const uint64_t index = uint64_t(it) * uint64_t(opts.batch_size) + uint64_t(b);
      const TrainingSample s = gen.sample(index);
      const ForwardPass pass = forward_pass(net, linear_inputs(s, gen.config().gamma));
      Rng rng(derive_seed(opts.seed, index));
      const auto configs = sample_loss_configs(w.n_render_configs, rng);
      const TotalLoss tl = total_loss(pass.maps, s.gt, configs, w);
      const std::vector<double> g = backward(net, pass, tl.grad);
      for (size_t i = 0; i < g.size(); ++i) grads[i] += g[i] * inv_batch;
      loss += tl.value * inv_batch;
    }
    if (!std::isfinite(loss)) fail(ErrorKind::numerical, "toy_train: non-finite loss at iteration " + std::to_string(it));
    trace.push_back(loss);
    adam.step(net.params(), grads);
    if (opts.callback) opts.callback(it, loss);
  }
  return trace;
}

}  // namespace svbrdf
