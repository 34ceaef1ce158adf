#include "gwct/codec.hpp"

#include <string>

#include "gwct/error.hpp"

namespace gwct {

namespace {

// One orthonormal 2x2 Haar analysis step: C x (h*w) -> 4C x (h/2 * w/2).
Eigen::MatrixXd haar_analysis(const Eigen::MatrixXd& in, int h, int w) {
  const Eigen::Index c = in.rows();
  const int oh = h / 2;
  const int ow = w / 2;
  Eigen::MatrixXd out(4 * c, static_cast<Eigen::Index>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const Eigen::Index o = static_cast<Eigen::Index>(y) * ow + x;
      const auto a = in.col(static_cast<Eigen::Index>(2 * y) * w + 2 * x);
      const auto b = in.col(static_cast<Eigen::Index>(2 * y) * w + 2 * x + 1);
      const auto cc = in.col(static_cast<Eigen::Index>(2 * y + 1) * w + 2 * x);
      const auto d = in.col(static_cast<Eigen::Index>(2 * y + 1) * w + 2 * x + 1);
      out.col(o).segment(0, c) = 0.5 * (a + b + cc + d);
      out.col(o).segment(c, c) = 0.5 * (a - b + cc - d);
      out.col(o).segment(2 * c, c) = 0.5 * (a + b - cc - d);
      out.col(o).segment(3 * c, c) = 0.5 * (a - b - cc + d);
    }
  }
  return out;
}

Eigen::MatrixXd haar_synthesis(const Eigen::MatrixXd& in, int oh, int ow) {
  const Eigen::Index c = in.rows() / 4;
  const int h = oh * 2;
  const int w = ow * 2;
  Eigen::MatrixXd out(c, static_cast<Eigen::Index>(h) * w);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const Eigen::Index o = static_cast<Eigen::Index>(y) * ow + x;
      const auto ll = in.col(o).segment(0, c);
      const auto lh = in.col(o).segment(c, c);
      const auto hl = in.col(o).segment(2 * c, c);
      const auto hh = in.col(o).segment(3 * c, c);
      out.col(static_cast<Eigen::Index>(2 * y) * w + 2 * x) = 0.5 * (ll + lh + hl + hh);
      out.col(static_cast<Eigen::Index>(2 * y) * w + 2 * x + 1) = 0.5 * (ll - lh + hl - hh);
      out.col(static_cast<Eigen::Index>(2 * y + 1) * w + 2 * x) = 0.5 * (ll + lh - hl - hh);
      out.col(static_cast<Eigen::Index>(2 * y + 1) * w + 2 * x + 1) = 0.5 * (ll - lh - hl + hh);
    }
  }
  return out;
}

}  // namespace

CodecLevelSpec AnalyticCodec::level_spec(int level) const {
  check_level(level);
  CodecLevelSpec spec;
  spec.level = level;
  spec.spatial_divisor = 1 << (level - 1);
  spec.channels = 3 * spec.spatial_divisor * spec.spatial_divisor;
  return spec;
}

FeatureMap AnalyticCodec::encode_padded(const ImageTensor& image, int level) const {
  Eigen::MatrixXd data = image.pixels;
  int h = image.height;
  int w = image.width;
  for (int step = 1; step < level; ++step) {
    data = haar_analysis(data, h, w);
    h /= 2;
    w /= 2;
  }
  return FeatureMap(std::move(data), h, w);
}

ImageTensor AnalyticCodec::decode_grid(const FeatureMap& features, int level) const {
  Eigen::MatrixXd data = features.data;
  int h = features.height;
  int w = features.width;
  for (int step = 1; step < level; ++step) {
    data = haar_synthesis(data, h, w);
    h *= 2;
    w *= 2;
  }
  return ImageTensor(h, w, std::move(data));
}

}  // namespace gwct
