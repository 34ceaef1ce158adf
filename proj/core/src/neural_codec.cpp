#include "gwct/codec.hpp"

#include <cstdio>
#include <string>
#include <vector>

#include "gwct/binary_io.hpp"
#include "gwct/error.hpp"

namespace gwct {

namespace {

// VGG-19 convolutions per block.
constexpr std::array<int, kNumLevels> kBlockConvs = {2, 2, 4, 4, 4};

struct LayerDesc {
  ConvNet::Op op;
  std::string name;  // conv layers only
  int in = 0;
  int out = 0;
  int kernel = 3;
};

using Plan = std::vector<LayerDesc>;

void conv(Plan& p, std::string name, int in, int out, int kernel = 3, bool relu = true) {
  p.push_back({ConvNet::Op::Conv, std::move(name), in, out, kernel});
  if (relu) p.push_back({ConvNet::Op::Relu, {}, 0, 0, 0});
}

std::string conv_name(int block, int index) {
  return "conv" + std::to_string(block) + "_" + std::to_string(index);
}

// Layers from the image up to relu<level>_1.
Plan encoder_plan(const LevelWidths& w, int level) {
  Plan p;
  conv(p, "conv0", 3, 3, 1, false);
  conv(p, "conv1_1", 3, w[0]);
  for (int block = 1; block < level; ++block) {
    const int width = w[static_cast<std::size_t>(block - 1)];
    for (int j = 2; j <= kBlockConvs[static_cast<std::size_t>(block - 1)]; ++j) {
      conv(p, conv_name(block, j), width, width);
    }
    p.push_back({ConvNet::Op::MaxPool, {}, 0, 0, 0});
    conv(p, conv_name(block + 1, 1), width, w[static_cast<std::size_t>(block)]);
  }
  return p;
}

// Mirror of encoder_plan(level): features at relu<level>_1 back to RGB.
Plan decoder_plan(const LevelWidths& w, int level) {
  Plan p;
  for (int block = level; block >= 2; --block) {
    const int from = w[static_cast<std::size_t>(block - 1)];
    const int to = w[static_cast<std::size_t>(block - 2)];
    conv(p, conv_name(block, 1), from, to);
    p.push_back({ConvNet::Op::Upsample, {}, 0, 0, 0});
    for (int j = kBlockConvs[static_cast<std::size_t>(block - 2)]; j >= 2; --j) {
      conv(p, conv_name(block - 1, j), to, to);
    }
  }
  conv(p, "conv1_1", w[0], 3, 3, false);
  return p;
}

std::string decoder_prefix(int level) { return "decoder" + std::to_string(level) + "."; }

template <typename Fn>
void for_each_conv(const Plan& plan, Fn&& fn) {
  for (const auto& layer : plan) {
    if (layer.op == ConvNet::Op::Conv) fn(layer);
  }
}

const NamedTensor& require(const WeightFile& file, const std::string& name,
                           const std::vector<std::uint64_t>& shape) {
  const NamedTensor* t = file.find(name);
  if (t == nullptr) {
    throw Error(ErrorCode::IncompleteWeights, "weight file is missing tensor '" + name + "'");
  }
  if (t->shape != shape) {
    throw Error(ErrorCode::ShapeMismatch, "tensor '" + name + "' has unexpected shape");
  }
  return *t;
}

std::vector<std::uint64_t> weight_shape(const LayerDesc& l) {
  return {static_cast<std::uint64_t>(l.out), static_cast<std::uint64_t>(l.in),
          static_cast<std::uint64_t>(l.kernel), static_cast<std::uint64_t>(l.kernel)};
}

ConvNet build_net(const Plan& plan, const std::string& prefix, const WeightFile& file) {
  ConvNet net;
  for (const auto& layer : plan) {
    switch (layer.op) {
      case ConvNet::Op::Conv: {
        Conv2d c;
        c.in_channels = layer.in;
        c.out_channels = layer.out;
        c.kernel = layer.kernel;
        c.weight = require(file, prefix + layer.name + ".weight", weight_shape(layer)).data;
        c.bias = require(file, prefix + layer.name + ".bias",
                         {static_cast<std::uint64_t>(layer.out)})
                     .data;
        net.add_conv(std::move(c));
        break;
      }
      case ConvNet::Op::Relu: net.add_relu(); break;
      case ConvNet::Op::MaxPool: net.add_max_pool(); break;
      case ConvNet::Op::Upsample: net.add_upsample(); break;
    }
  }
  return net;
}

LevelWidths infer_widths(const WeightFile& file) {
  LevelWidths w{};
  for (int level = 1; level <= kNumLevels; ++level) {
    const std::string name = "encoder." + conv_name(level, 1) + ".weight";
    const NamedTensor* t = file.find(name);
    if (t == nullptr) {
      throw Error(ErrorCode::IncompleteWeights, "weight file is missing tensor '" + name + "'");
    }
    if (t->shape.size() != 4 || t->shape[0] == 0) {
      throw Error(ErrorCode::ShapeMismatch, "tensor '" + name + "' has unexpected shape");
    }
    w[static_cast<std::size_t>(level - 1)] = static_cast<int>(t->shape[0]);
  }
  return w;
}

Activation to_activation(const ImageTensor& image) {
  Activation a(3, image.height, image.width);
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index p = 0; p < image.pixels.cols(); ++p) {
      a.data[static_cast<std::size_t>(c * image.pixels.cols() + p)] =
          static_cast<float>(image.pixels(c, p));
    }
  }
  return a;
}

}  // namespace

std::map<std::string, std::vector<std::uint64_t>> neural_tensor_inventory(
    const LevelWidths& widths) {
  std::map<std::string, std::vector<std::uint64_t>> inv;
  auto add = [&](const std::string& prefix, const LayerDesc& l) {
    inv[prefix + l.name + ".weight"] = weight_shape(l);
    inv[prefix + l.name + ".bias"] = {static_cast<std::uint64_t>(l.out)};
  };
  for_each_conv(encoder_plan(widths, kNumLevels),
                [&](const LayerDesc& l) { add("encoder.", l); });
  for (int level = 1; level <= kNumLevels; ++level) {
    for_each_conv(decoder_plan(widths, level),
                  [&](const LayerDesc& l) { add(decoder_prefix(level), l); });
  }
  return inv;
}

WeightFile make_neural_weights(
    const LevelWidths& widths,
    const std::function<float(const std::string&, std::size_t)>& fill) {
  WeightFile file;
  for (const auto& [name, shape] : neural_tensor_inventory(widths)) {
    NamedTensor t;
    t.name = name;
    t.shape = shape;
    t.data.resize(static_cast<std::size_t>(t.element_count()));
    for (std::size_t i = 0; i < t.data.size(); ++i) t.data[i] = fill(name, i);
    file.add(std::move(t));
  }
  return file;
}

NeuralCodec::NeuralCodec(const WeightFile& weights) : widths_(infer_widths(weights)) {
  for (const auto& [name, shape] : neural_tensor_inventory(widths_)) {
    require(weights, name, shape);
  }
  for (int level = 1; level <= kNumLevels; ++level) {
    const auto idx = static_cast<std::size_t>(level - 1);
    encoders_[idx] = build_net(encoder_plan(widths_, level), "encoder.", weights);
    decoders_[idx] = build_net(decoder_plan(widths_, level), decoder_prefix(level), weights);
  }
  io::ByteWriter digest;
  for (const auto& t : weights.tensors()) {
    const auto crc = tensor_checksum(t);
    checksums_[t.name] = crc;
    digest.str(t.name);
    digest.u32(crc);
  }
  digest_ = io::crc32(digest.buffer());
  ready_ = true;
}

NeuralCodec NeuralCodec::load_weights(const std::filesystem::path& path) {
  return NeuralCodec(WeightFile::load(path));
}

std::string NeuralCodec::id() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%08x", digest_);
  return "neural:" + std::string(buf);
}

CodecLevelSpec NeuralCodec::level_spec(int level) const {
  check_level(level);
  ensure_ready();
  CodecLevelSpec spec;
  spec.level = level;
  spec.channels = widths_[static_cast<std::size_t>(level - 1)];
  spec.spatial_divisor = 1 << (level - 1);
  return spec;
}

void NeuralCodec::ensure_ready() const {
  if (!ready_) throw Error(ErrorCode::CodecNotReady, "neural codec has no weights loaded");
}

FeatureMap NeuralCodec::encode_padded(const ImageTensor& image, int level) const {
  const Activation a =
      encoders_[static_cast<std::size_t>(level - 1)].forward(to_activation(image));
  const Eigen::Index cells = static_cast<Eigen::Index>(a.height) * a.width;
  Eigen::MatrixXd data(a.channels, cells);
  for (int c = 0; c < a.channels; ++c) {
    for (Eigen::Index p = 0; p < cells; ++p) {
      data(c, p) = a.data[static_cast<std::size_t>(c * cells + p)];
    }
  }
  return FeatureMap(std::move(data), a.height, a.width);
}

ImageTensor NeuralCodec::decode_grid(const FeatureMap& features, int level) const {
  Activation a(static_cast<int>(features.channels()), features.height, features.width);
  const Eigen::Index cells = features.cells();
  for (int c = 0; c < a.channels; ++c) {
    for (Eigen::Index p = 0; p < cells; ++p) {
      a.data[static_cast<std::size_t>(c * cells + p)] = static_cast<float>(features.data(c, p));
    }
  }
  const Activation out = decoders_[static_cast<std::size_t>(level - 1)].forward(std::move(a));
  ImageTensor image(out.height, out.width);
  const Eigen::Index n = image.pixels.cols();
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index p = 0; p < n; ++p) {
      image.pixels(c, p) = out.data[static_cast<std::size_t>(c * n + p)];
    }
  }
  return image;
}

}  // namespace gwct
