#include "gwct/image.hpp"

#include <string>

#include "gwct/error.hpp"

namespace gwct {

ImageTensor::ImageTensor(int h, int w) : height(h), width(w) {
  if (h < 0 || w < 0) throw Error(ErrorCode::ShapeMismatch, "negative image size");
  pixels.setZero(3, static_cast<Eigen::Index>(h) * w);
}

ImageTensor::ImageTensor(int h, int w, Eigen::Matrix<double, 3, Eigen::Dynamic> px)
    : height(h), width(w), pixels(std::move(px)) {
  if (h < 0 || w < 0 || pixels.cols() != static_cast<Eigen::Index>(h) * w) {
    throw Error(ErrorCode::ShapeMismatch,
                "pixel matrix does not match " + std::to_string(h) + "x" +
                    std::to_string(w) + " image");
  }
}

int reflect_index(int i, int n) noexcept {
  if (n <= 1) return 0;
  const int period = 2 * (n - 1);
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - m;
}

int round_up(int n, int divisor) noexcept {
  return ((n + divisor - 1) / divisor) * divisor;
}

ImageTensor reflect_pad(const ImageTensor& image, int height, int width) {
  if (height == image.height && width == image.width) return image;
  if (height < image.height || width < image.width) {
    throw Error(ErrorCode::ShapeMismatch, "padding target smaller than image");
  }
  ImageTensor out(height, width);
  for (int y = 0; y < height; ++y) {
    const int sy = reflect_index(y, image.height);
    for (int x = 0; x < width; ++x) {
      const int sx = reflect_index(x, image.width);
      out.pixels.col(static_cast<Eigen::Index>(y) * width + x) =
          image.pixels.col(static_cast<Eigen::Index>(sy) * image.width + sx);
    }
  }
  return out;
}

ImageTensor crop(const ImageTensor& image, int height, int width) {
  if (height == image.height && width == image.width) return image;
  if (height > image.height || width > image.width) {
    throw Error(ErrorCode::ShapeMismatch, "crop target larger than image");
  }
  ImageTensor out(height, width);
  for (int y = 0; y < height; ++y) {
    out.pixels.middleCols(static_cast<Eigen::Index>(y) * width, width) =
        image.pixels.middleCols(static_cast<Eigen::Index>(y) * image.width, width);
  }
  return out;
}

ImageTensor clamp_unit(ImageTensor image) {
  image.pixels = image.pixels.cwiseMax(0.0).cwiseMin(1.0);
  return image;
}

}  // namespace gwct
