#include "gwct/conv_net.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Core>

#include "gwct/error.hpp"
#include "gwct/image.hpp"

namespace gwct {

namespace {

using RowMajorXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Output pixels processed per GEMM; bounds the im2col buffer.
constexpr int kChunkPixels = 4096;

}  // namespace

Activation Conv2d::forward(const Activation& input) const {
  if (input.channels != in_channels) {
    throw Error(ErrorCode::ShapeMismatch,
                "convolution expects " + std::to_string(in_channels) + " channels, got " +
                    std::to_string(input.channels));
  }
  const int h = input.height;
  const int w = input.width;
  const int k = kernel;
  const int before = (k - 1) / 2;
  const int patch = in_channels * k * k;
  const int pixels = h * w;

  Eigen::Map<const RowMajorXf> wmat(weight.data(), out_channels, patch);
  Eigen::Map<const Eigen::VectorXf> bvec(bias.data(), out_channels);

  Activation out(out_channels, h, w);
  Eigen::Map<RowMajorXf> omat(out.data.data(), out_channels, pixels);

  // Precompute reflected source coordinates per kernel offset.
  std::vector<int> ry(static_cast<std::size_t>(h) * k);
  std::vector<int> rx(static_cast<std::size_t>(w) * k);
  for (int y = 0; y < h; ++y) {
    for (int dy = 0; dy < k; ++dy) ry[static_cast<std::size_t>(y) * k + dy] = reflect_index(y + dy - before, h);
  }
  for (int x = 0; x < w; ++x) {
    for (int dx = 0; dx < k; ++dx) rx[static_cast<std::size_t>(x) * k + dx] = reflect_index(x + dx - before, w);
  }

  Eigen::MatrixXf cols(patch, std::min(kChunkPixels, std::max(pixels, 1)));
  for (int start = 0; start < pixels; start += kChunkPixels) {
    const int n = std::min(kChunkPixels, pixels - start);
    for (int j = 0; j < n; ++j) {
      const int p = start + j;
      const int y = p / w;
      const int x = p % w;
      int row = 0;
      for (int c = 0; c < in_channels; ++c) {
        for (int dy = 0; dy < k; ++dy) {
          const int sy = ry[static_cast<std::size_t>(y) * k + dy];
          for (int dx = 0; dx < k; ++dx) {
            cols(row++, j) = input.at(c, sy, rx[static_cast<std::size_t>(x) * k + dx]);
          }
        }
      }
    }
    omat.middleCols(start, n).noalias() = wmat * cols.leftCols(n);
    omat.middleCols(start, n).colwise() += bvec;
  }
  return out;
}

Activation relu(Activation a) {
  for (auto& v : a.data) v = std::max(v, 0.0f);
  return a;
}

Activation max_pool2(const Activation& a) {
  Activation out(a.channels, a.height / 2, a.width / 2);
  for (int c = 0; c < a.channels; ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        out.at(c, y, x) = std::max({a.at(c, 2 * y, 2 * x), a.at(c, 2 * y, 2 * x + 1),
                                    a.at(c, 2 * y + 1, 2 * x), a.at(c, 2 * y + 1, 2 * x + 1)});
      }
    }
  }
  return out;
}

Activation upsample_nearest2(const Activation& a) {
  Activation out(a.channels, a.height * 2, a.width * 2);
  for (int c = 0; c < a.channels; ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) out.at(c, y, x) = a.at(c, y / 2, x / 2);
    }
  }
  return out;
}

void ConvNet::add_conv(Conv2d conv) {
  const auto expected = static_cast<std::size_t>(conv.out_channels) * conv.in_channels *
                        conv.kernel * conv.kernel;
  if (conv.kernel < 1 || conv.weight.size() != expected ||
      conv.bias.size() != static_cast<std::size_t>(conv.out_channels)) {
    throw Error(ErrorCode::ShapeMismatch, "convolution weights do not match declared shape");
  }
  ops_.push_back({Op::Conv, convs_.size()});
  convs_.push_back(std::move(conv));
}

void ConvNet::add_relu() { ops_.push_back({Op::Relu, 0}); }
void ConvNet::add_max_pool() { ops_.push_back({Op::MaxPool, 0}); }
void ConvNet::add_upsample() { ops_.push_back({Op::Upsample, 0}); }

Activation ConvNet::forward(Activation x) const {
  for (const auto& step : ops_) {
    switch (step.op) {
      case Op::Conv: x = convs_[step.conv_index].forward(x); break;
      case Op::Relu: x = relu(std::move(x)); break;
      case Op::MaxPool: x = max_pool2(x); break;
      case Op::Upsample: x = upsample_nearest2(x); break;
    }
  }
  return x;
}

}  // namespace gwct
