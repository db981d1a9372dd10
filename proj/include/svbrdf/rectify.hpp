#pragma once

#include <array>
#include <sstream>

#include <Eigen/Dense>

#include "svbrdf/image.hpp"
#include "svbrdf/io.hpp"

namespace svbrdf {

struct Point2 {
  double x = 0, y = 0;
  bool operator==(const Point2&) const = default;
};

/// Frame corners in image pixels, ordered top-left, top-right,
/// bottom-right, bottom-left. Pixel centres sit at +0.5.
struct CornerSet {
  std::array<Point2, 4> pts;
  int target_size = 256;
};

/// Projective map normalized so that h33 = 1.
struct Homography {
  Eigen::Matrix3d m = Eigen::Matrix3d::Identity();

  Point2 apply(const Point2& p) const {
    const Eigen::Vector3d q = m * Eigen::Vector3d(p.x, p.y, 1.0);
    return {q.x() / q.z(), q.y() / q.z()};
  }

  Homography inverse() const { return from_matrix(m.inverse()); }

  /// this after other: p -> this(other(p)).
  Homography after(const Homography& other) const { return from_matrix(m * other.m); }

  static Homography from_matrix(const Eigen::Matrix3d& a) {
    if (!(std::abs(a(2, 2)) > 1e-300))
      fail(ErrorKind::numerical, "homography: h33 vanishes, cannot normalize");
    Homography h;
    h.m = a / a(2, 2);
    if (!(std::abs(h.m.determinant()) > 1e-12)) fail(ErrorKind::numerical, "homography: singular matrix");
    return h;
  }
};

namespace detail {

/// Similarity moving the centroid to the origin with mean distance sqrt(2).
inline Eigen::Matrix3d hartley(const std::array<Point2, 4>& p) {
  double cx = 0, cy = 0;
  for (const auto& q : p) {
    cx += q.x / 4;
    cy += q.y / 4;
  }
  double d = 0;
  for (const auto& q : p) d += std::hypot(q.x - cx, q.y - cy) / 4;
  if (!(d > 0)) fail(ErrorKind::numerical, "homography: coincident points");
  const double s = std::sqrt(2.0) / d;
  Eigen::Matrix3d t;
  t << s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1;
  return t;
}

inline bool has_collinear_triple(const std::array<Point2, 4>& p) {
  double scale = 0;
  for (const auto& a : p)
    for (const auto& b : p) scale = std::max(scale, std::hypot(a.x - b.x, a.y - b.y));
  for (int i = 0; i < 4; ++i) {
    const Point2 &a = p[size_t(i)], &b = p[size_t((i + 1) % 4)], &c = p[size_t((i + 2) % 4)];
    const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::abs(area) <= 1e-10 * scale * scale) return true;
  }
  return false;
}

}  // namespace detail

/// Four-point direct linear transform with Hartley normalization, solving
/// the 8x8 system for h11..h32 with h33 = 1.
inline Homography solve_homography(const std::array<Point2, 4>& src, const std::array<Point2, 4>& dst) {
  if (detail::has_collinear_triple(src) || detail::has_collinear_triple(dst))
    fail(ErrorKind::numerical, "homography: degenerate quad (three collinear points)");
  const Eigen::Matrix3d ts = detail::hartley(src), td = detail::hartley(dst);
  Eigen::Matrix<double, 8, 8> A;
  Eigen::Matrix<double, 8, 1> b;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector3d s = ts * Eigen::Vector3d(src[size_t(i)].x, src[size_t(i)].y, 1.0);
    const Eigen::Vector3d d = td * Eigen::Vector3d(dst[size_t(i)].x, dst[size_t(i)].y, 1.0);
    const double x = s.x(), y = s.y(), u = d.x(), v = d.y();
    A.row(2 * i) << x, y, 1, 0, 0, 0, -u * x, -u * y;
    A.row(2 * i + 1) << 0, 0, 0, x, y, 1, -v * x, -v * y;
    b(2 * i) = u;
    b(2 * i + 1) = v;
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 8, 8>> lu(A);
  if (lu.rank() < 8) fail(ErrorKind::numerical, "homography: singular linear system");
  const Eigen::Matrix<double, 8, 1> h = lu.solve(b);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
  return Homography::from_matrix(td.inverse() * hn * ts);
}

/// Bilinear lookup in continuous pixel coordinates, clamped to the edge.
inline void sample_bilinear_clamp(const Image& img, double fx, double fy, double* out) {
  const double sx = std::clamp(fx - 0.5, 0.0, double(img.width() - 1));
  const double sy = std::clamp(fy - 0.5, 0.0, double(img.height() - 1));
  const int x0 = int(std::floor(sx)), y0 = int(std::floor(sy));
  const int x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
  const double tx = sx - x0, ty = sy - y0;
  for (int c = 0; c < img.channels(); ++c) {
    const double top = (1.0 - tx) * img.at(x0, y0, c) + tx * img.at(x1, y0, c);
    const double bot = (1.0 - tx) * img.at(x0, y1, c) + tx * img.at(x1, y1, c);
    out[c] = (1.0 - ty) * top + ty * bot;
  }
}

/// Homography taking the unit square (0,0),(1,0),(1,1),(0,1) onto the quad.
inline Homography unit_square_to_quad(const CornerSet& corners) {
  return solve_homography({Point2{0, 0}, Point2{1, 0}, Point2{1, 1}, Point2{0, 1}}, corners.pts);
}

/// Inverse-warps the quad to a target_size square.
inline Image rectify(const Image& image, const CornerSet& corners) {
  require(corners.target_size >= 1, "rectify: target_size must be positive");
  require(!image.empty(), "rectify: empty image");
  const Homography h = unit_square_to_quad(corners);
  const int n = corners.target_size;
  Image out(n, n, image.channels());
  parallel_for(n, [&](int v) {
    for (int u = 0; u < n; ++u) {
      const Point2 src = h.apply({(u + 0.5) / n, (v + 0.5) / n});
      sample_bilinear_clamp(image, src.x, src.y, &out.at(u, v, 0));
    }
  });
  return out;
}

inline CornerSet full_image_corners(int width, int height, int target_size) {
  CornerSet c;
  c.pts = {Point2{0, 0}, Point2{double(width), 0}, Point2{double(width), double(height)},
           Point2{0, double(height)}};
  c.target_size = target_size;
  return c;
}

namespace io {

/// Four "x,y" (or "x y") lines in TL, TR, BR, BL order; blank lines and
/// lines starting with '#' are skipped.
inline std::array<Point2, 4> parse_corners(const std::string& text) {
  std::array<Point2, 4> pts;
  int n = 0;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (n == 4) fail(ErrorKind::usage, "corners: more than four points");
    std::string s = t;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream ls(s);
    double x, y;
    std::string extra;
    if (!(ls >> x >> y) || (ls >> extra))
      fail(ErrorKind::usage, "corners: line " + std::to_string(lineno) + " is not 'x,y'");
    pts[size_t(n++)] = {x, y};
  }
  if (n != 4) fail(ErrorKind::usage, "corners: expected 4 points, got " + std::to_string(n));
  return pts;
}

inline std::array<Point2, 4> read_corners(const fs::path& path) { return parse_corners(read_text(path)); }

}  // namespace io

}  // namespace svbrdf
