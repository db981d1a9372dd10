#pragma once

#include <span>
#include <vector>

#include "svbrdf/common.hpp"

namespace svbrdf {

/// Row-major, channel-interleaved image of doubles. Pixel (x, y) has y as
/// the row index, row 0 first.
class Image {
public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0)
      : width_(width), height_(height), channels_(channels),
        data_(size_t(width) * height * channels, fill) {
    require(width >= 0 && height >= 0 && channels > 0, "image: invalid dimensions");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  size_t pixel_count() const { return size_t(width_) * height_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  size_t index(int x, int y, int c = 0) const {
    return (size_t(y) * width_ + x) * channels_ + c;
  }
  double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
  double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

  std::span<double> pixel(int x, int y) { return {data_.data() + index(x, y), size_t(channels_)}; }
  std::span<const double> pixel(int x, int y) const {
    return {data_.data() + index(x, y), size_t(channels_)};
  }

  Rgb rgb(int x, int y) const {
    const double* p = data_.data() + index(x, y);
    return {p[0], p[1], p[2]};
  }
  void set_rgb(int x, int y, const Rgb& v) {
    double* p = data_.data() + index(x, y);
    p[0] = v.x; p[1] = v.y; p[2] = v.z;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  bool operator==(const Image&) const = default;

private:
  int width_ = 0, height_ = 0, channels_ = 1;
  std::vector<double> data_;
};

/// Linear HDR radiance, three channels, unbounded above.
struct RadianceImage : Image {
  RadianceImage() = default;
  RadianceImage(int w, int h) : Image(w, h, 3) {}
  explicit RadianceImage(Image img) : Image(std::move(img)) {}
};

/// Display-referred observation in [0, 1], typically gamma encoded.
struct LdrImage : Image {
  LdrImage() = default;
  LdrImage(int w, int h, int channels = 3) : Image(w, h, channels) {}
  explicit LdrImage(Image img) : Image(std::move(img)) {}
};

}  // namespace svbrdf
