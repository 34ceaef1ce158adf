#pragma once

#include <Eigen/Dense>

namespace gwct {

struct ImageSize {
  int height = 0;
  int width = 0;
  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// RGB image with channel values in [0, 1]. pixels is 3 x (height*width),
/// one column per pixel in row-major order.
struct ImageTensor {
  int height = 0;
  int width = 0;
  Eigen::Matrix<double, 3, Eigen::Dynamic> pixels;

  ImageTensor() = default;
  ImageTensor(int height, int width);  // zero-filled
  ImageTensor(int height, int width, Eigen::Matrix<double, 3, Eigen::Dynamic> pixels);

  ImageSize size() const noexcept { return {height, width}; }
  double& at(int c, int y, int x) { return pixels(c, static_cast<Eigen::Index>(y) * width + x); }
  double at(int c, int y, int x) const {
    return pixels(c, static_cast<Eigen::Index>(y) * width + x);
  }
};

/// Symmetric reflection (edge pixel not repeated) of an out-of-range index,
/// periodic so arbitrarily large pads stay in range.
int reflect_index(int i, int n) noexcept;

/// Smallest multiple of divisor that is >= n.
int round_up(int n, int divisor) noexcept;

ImageTensor reflect_pad(const ImageTensor& image, int height, int width);
ImageTensor crop(const ImageTensor& image, int height, int width);
ImageTensor clamp_unit(ImageTensor image);

}  // namespace gwct
