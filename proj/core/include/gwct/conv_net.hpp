#pragma once

#include <vector>

namespace gwct {

/// Dense CHW float activation.
struct Activation {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Activation() = default;
  Activation(int c, int h, int w) : channels(c), height(h), width(w),
      data(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0.0f) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

/// Square-kernel convolution with reflection padding: (k-1)/2 before and k/2
/// after along each axis, so the output keeps the input size.
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  std::vector<float> weight;  // [out][in][k][k]
  std::vector<float> bias;    // [out]

  Activation forward(const Activation& input) const;
};

Activation relu(Activation a);
/// 2x2 window, stride 2; odd trailing rows/columns are dropped.
Activation max_pool2(const Activation& a);
Activation upsample_nearest2(const Activation& a);

class ConvNet {
 public:
  enum class Op { Conv, Relu, MaxPool, Upsample };

  void add_conv(Conv2d conv);
  void add_relu();
  void add_max_pool();
  void add_upsample();

  Activation forward(Activation input) const;
  std::size_t size() const noexcept { return ops_.size(); }

 private:
  struct Step {
    Op op;
    std::size_t conv_index;
  };
  std::vector<Step> ops_;
  std::vector<Conv2d> convs_;
};

}  // namespace gwct
