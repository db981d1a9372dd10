#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "svbrdf/common.hpp"

// Minimal CPU layers with hand-written backward passes. Parameters live in a
// flat vector owned by the model; each layer records its offsets into it.

namespace svbrdf::nn {

/// Channel-major (C, H, W) activation.
struct Tensor {
  int c = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, double fill = 0.0)
      : c(c_), h(h_), w(w_), v(size_t(c_) * h_ * w_, fill) {}

  size_t plane() const { return size_t(h) * w; }
  double* channel(int k) { return v.data() + size_t(k) * plane(); }
  const double* channel(int k) const { return v.data() + size_t(k) * plane(); }
  double& at(int k, int y, int x) { return v[(size_t(k) * h + y) * w + x]; }
  double at(int k, int y, int x) const { return v[(size_t(k) * h + y) * w + x]; }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
  bool operator==(const Tensor&) const = default;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

/// 3x3 convolution, zero padding 1, stride 1 or 2, evaluated as a matrix
/// product over an im2col buffer. Weight layout is [out][in][ky][kx].
struct Conv3x3 {
  int in = 0, out = 0, stride = 1;
  size_t w_off = 0, b_off = 0;

  size_t weight_count() const { return size_t(out) * in * 9; }
  size_t param_count() const { return weight_count() + size_t(out); }
  int fan_in() const { return in * 9; }

  int out_h(int h) const { return (h - 1) / stride + 1; }
  int out_w(int w) const { return (w - 1) / stride + 1; }

  // Eigen picks its kernels by buffer alignment, so every operand is copied
  // into an owned (maximally aligned) matrix to keep results bit-stable.
  RowMatrix weights(std::span<const double> params) const {
    return ConstMatrixMap(params.data() + w_off, out, Eigen::Index(in) * 9);
  }

  /// Rows (ci, ky, kx), columns output pixels.
  RowMatrix im2col(const Tensor& x) const {
    const int ho = out_h(x.h), wo = out_w(x.w);
    RowMatrix cols = RowMatrix::Zero(Eigen::Index(in) * 9, Eigen::Index(ho) * wo);
    for (int ci = 0; ci < in; ++ci)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          double* row = cols.row((ci * 3 + ky) * 3 + kx).data();
          // Output columns whose input column lies inside the image.
          const int ox0 = kx == 0 ? 1 : 0;
          const int ox1 = std::min(wo, (x.w - kx) / stride + 1);
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride + ky - 1;
            if (iy < 0 || iy >= x.h) continue;
            const double* src = x.channel(ci) + size_t(iy) * x.w + (kx - 1);
            double* dst = row + size_t(oy) * wo;
            for (int ox = ox0; ox < ox1; ++ox) dst[ox] = src[ox * stride];
          }
        }
    return cols;
  }

  Tensor forward(std::span<const double> params, const Tensor& x) const {
    require(x.c == in, "conv: channel mismatch");
    Tensor y(out, out_h(x.h), out_w(x.w));
    const RowMatrix Y = weights(params) * im2col(x);
    for (int co = 0; co < out; ++co) {
      const double b = params[b_off + size_t(co)];
      double* dst = y.channel(co);
      for (size_t i = 0; i < y.plane(); ++i) dst[i] = Y(co, Eigen::Index(i)) + b;
    }
    return y;
  }

  /// Accumulates parameter gradients into `grads` and returns dL/dx.
  Tensor backward(std::span<const double> params, std::span<double> grads, const Tensor& x,
                  const Tensor& dy) const {
    const int ho = dy.h, wo = dy.w;
    const RowMatrix dY = ConstMatrixMap(dy.v.data(), out, Eigen::Index(dy.plane()));
    const RowMatrix dW = dY * im2col(x).transpose();
    for (size_t i = 0; i < weight_count(); ++i) grads[w_off + i] += dW.data()[i];
    for (int co = 0; co < out; ++co) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < dY.cols(); ++i) s += dY(co, i);
      grads[b_off + size_t(co)] += s;
    }
    const RowMatrix dcols = weights(params).transpose() * dY;
    Tensor dx(in, x.h, x.w);
    for (int ci = 0; ci < in; ++ci)
      for (int ky = 0; ky < 3; ++ky)
        for (int kx = 0; kx < 3; ++kx) {
          const double* row = dcols.row((ci * 3 + ky) * 3 + kx).data();
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = oy * stride + ky - 1;
            if (iy < 0 || iy >= x.h) continue;
            for (int ox = 0; ox < wo; ++ox) {
              const int ix = ox * stride + kx - 1;
              if (ix >= 0 && ix < x.w) dx.at(ci, iy, ix) += row[oy * wo + ox];
            }
          }
        }
    return dx;
  }
};

struct Linear {
  int in = 0, out = 0;
  size_t w_off = 0, b_off = 0;

  size_t param_count() const { return size_t(out) * in + size_t(out); }
  int fan_in() const { return in; }

  std::vector<double> forward(std::span<const double> params, std::span<const double> x) const {
    require(int(x.size()) == in, "linear: size mismatch");
    std::vector<double> y(static_cast<size_t>(out));
    const double* W = params.data() + w_off;
    for (int o = 0; o < out; ++o) {
      double s = params[b_off + size_t(o)];
      for (int i = 0; i < in; ++i) s += W[size_t(o) * in + i] * x[size_t(i)];
      y[size_t(o)] = s;
    }
    return y;
  }

  std::vector<double> backward(std::span<const double> params, std::span<double> grads,
                               std::span<const double> x, std::span<const double> dy) const {
    const double* W = params.data() + w_off;
    std::vector<double> dx(size_t(in), 0.0);
    for (int o = 0; o < out; ++o) {
      const double g = dy[size_t(o)];
      grads[b_off + size_t(o)] += g;
      for (int i = 0; i < in; ++i) {
        grads[w_off + size_t(o) * in + i] += g * x[size_t(i)];
        dx[size_t(i)] += W[size_t(o) * in + i] * g;
      }
    }
    return dx;
  }
};

/// Per-channel normalization over the spatial extent, no affine terms.
struct InstanceNormCache {
  Tensor xhat;
  std::vector<double> inv_std;
};

inline constexpr double kNormEps = 1e-5;

inline Tensor instance_norm(const Tensor& x, InstanceNormCache& cache) {
  Tensor y(x.c, x.h, x.w);
  cache.inv_std.assign(size_t(x.c), 0.0);
  const double n = double(x.plane());
  for (int k = 0; k < x.c; ++k) {
    const double* xc = x.channel(k);
    double mean = 0.0;
    for (size_t i = 0; i < x.plane(); ++i) mean += xc[i];
    mean /= n;
    double var = 0.0;
    for (size_t i = 0; i < x.plane(); ++i) var += (xc[i] - mean) * (xc[i] - mean);
    var /= n;
    const double is = 1.0 / std::sqrt(var + kNormEps);
    cache.inv_std[size_t(k)] = is;
    double* yc = y.channel(k);
    for (size_t i = 0; i < x.plane(); ++i) yc[i] = (xc[i] - mean) * is;
  }
  cache.xhat = y;
  return y;
}

inline Tensor instance_norm_backward(const InstanceNormCache& cache, const Tensor& dy) {
  const Tensor& xh = cache.xhat;
  Tensor dx(dy.c, dy.h, dy.w);
  const double n = double(dy.plane());
  for (int k = 0; k < dy.c; ++k) {
    const double* g = dy.channel(k);
    const double* h = xh.channel(k);
    double mg = 0.0, mgh = 0.0;
    for (size_t i = 0; i < dy.plane(); ++i) {
      mg += g[i];
      mgh += g[i] * h[i];
    }
    mg /= n;
    mgh /= n;
    double* d = dx.channel(k);
    const double is = cache.inv_std[size_t(k)];
    for (size_t i = 0; i < dy.plane(); ++i) d[i] = is * (g[i] - mg - h[i] * mgh);
  }
  return dx;
}

inline double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }

inline Tensor leaky_relu(const Tensor& x, double slope) {
  Tensor y = x;
  for (double& v : y.v) v = leaky(v, slope);
  return y;
}

inline std::vector<double> leaky_relu(std::vector<double> x, double slope) {
  for (double& v : x) v = leaky(v, slope);
  return x;
}

/// dy scaled by the slope wherever the pre-activation was not positive.
inline std::vector<double> leaky_relu_backward(const std::vector<double>& pre,
                                               std::vector<double> dy, double slope) {
  for (size_t i = 0; i < dy.size(); ++i)
    if (!(pre[i] > 0.0)) dy[i] *= slope;
  return dy;
}

inline Tensor leaky_relu_backward(const Tensor& pre, Tensor dy, double slope) {
  dy.v = leaky_relu_backward(pre.v, std::move(dy.v), slope);
  return dy;
}

inline Tensor upsample2(const Tensor& x) {
  Tensor y(x.c, x.h * 2, x.w * 2);
  for (int k = 0; k < x.c; ++k)
    for (int yy = 0; yy < y.h; ++yy)
      for (int xx = 0; xx < y.w; ++xx) y.at(k, yy, xx) = x.at(k, yy / 2, xx / 2);
  return y;
}

inline Tensor upsample2_backward(const Tensor& dy) {
  Tensor dx(dy.c, dy.h / 2, dy.w / 2);
  for (int k = 0; k < dy.c; ++k)
    for (int yy = 0; yy < dy.h; ++yy)
      for (int xx = 0; xx < dy.w; ++xx) dx.at(k, yy / 2, xx / 2) += dy.at(k, yy, xx);
  return dx;
}

inline Tensor concat(const Tensor& a, const Tensor& b) {
  require(a.h == b.h && a.w == b.w, "concat: spatial mismatch");
  Tensor y(a.c + b.c, a.h, a.w);
  std::copy(a.v.begin(), a.v.end(), y.v.begin());
  std::copy(b.v.begin(), b.v.end(), y.v.begin() + std::ptrdiff_t(a.v.size()));
  return y;
}

inline std::pair<Tensor, Tensor> split(const Tensor& y, int first_channels) {
  Tensor a(first_channels, y.h, y.w), b(y.c - first_channels, y.h, y.w);
  std::copy(y.v.begin(), y.v.begin() + std::ptrdiff_t(a.v.size()), a.v.begin());
  std::copy(y.v.begin() + std::ptrdiff_t(a.v.size()), y.v.end(), b.v.begin());
  return {a, b};
}

inline std::vector<double> spatial_mean(const Tensor& x) {
  std::vector<double> m(size_t(x.c), 0.0);
  for (int k = 0; k < x.c; ++k) {
    const double* xc = x.channel(k);
    double s = 0.0;
    for (size_t i = 0; i < x.plane(); ++i) s += xc[i];
    m[size_t(k)] = s / double(x.plane());
  }
  return m;
}

/// x + v broadcast over space.
inline Tensor add_broadcast(Tensor x, std::span<const double> v) {
  for (int k = 0; k < x.c; ++k) {
    double* xc = x.channel(k);
    for (size_t i = 0; i < x.plane(); ++i) xc[i] += v[size_t(k)];
  }
  return x;
}

/// Gradient of a broadcast vector: spatial sum per channel.
inline std::vector<double> spatial_sum(const Tensor& dy) {
  std::vector<double> s(size_t(dy.c), 0.0);
  for (int k = 0; k < dy.c; ++k) {
    const double* d = dy.channel(k);
    double acc = 0.0;
    for (size_t i = 0; i < dy.plane(); ++i) acc += d[i];
    s[size_t(k)] = acc;
  }
  return s;
}

}  // namespace svbrdf::nn
