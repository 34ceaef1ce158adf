#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "gwct/conv_net.hpp"
#include "gwct/image.hpp"
#include "gwct/tensorops.hpp"
#include "gwct/weight_file.hpp"

namespace gwct {

inline constexpr int kNumLevels = 5;

struct CodecLevelSpec {
  int level = 1;
  int channels = 0;
  int spatial_divisor = 1;  // 2^(level-1)
};

/// Multi-level encoder/decoder. Inputs of any size are reflect-padded to a
/// multiple of the level divisor; decode crops back when given the original
/// size and always clamps to [0, 1]. Instances are immutable and thread-safe.
class Codec {
 public:
  virtual ~Codec() = default;

  virtual std::string id() const = 0;
  virtual CodecLevelSpec level_spec(int level) const = 0;

  FeatureMap encode(const ImageTensor& image, int level) const;
  ImageTensor decode(const FeatureMap& features, int level,
                     std::optional<ImageSize> output_size = std::nullopt) const;

 protected:
  // Inputs here are already padded and validated.
  virtual FeatureMap encode_padded(const ImageTensor& image, int level) const = 0;
  virtual ImageTensor decode_grid(const FeatureMap& features, int level) const = 0;
  virtual void ensure_ready() const {}

  static void check_level(int level);
};

/// Exactly invertible multi-scale transform. Level k applies k-1 orthonormal
/// 2x2 Haar analysis steps to every channel and stacks all sub-bands as
/// channels, giving 3 * 4^(k-1) channels: 3, 12, 48, 192, 768.
/// Channel order after a step is band-major: [LL | LH | HL | HH] x input channels.
class AnalyticCodec final : public Codec {
 public:
  std::string id() const override { return "analytic"; }
  CodecLevelSpec level_spec(int level) const override;

 protected:
  FeatureMap encode_padded(const ImageTensor& image, int level) const override;
  ImageTensor decode_grid(const FeatureMap& features, int level) const override;
};

/// Per-level channel widths of the VGG-19 trunk tapped at relu_k_1.
using LevelWidths = std::array<int, kNumLevels>;
inline constexpr LevelWidths kVgg19Widths = {64, 128, 256, 512, 512};

/// Names and shapes of every tensor a NeuralCodec needs, for the given widths.
/// Encoder tensors are shared ("encoder.convX_Y.{weight,bias}"); each level has
/// its own decoder ("decoder<k>.convX_Y.{weight,bias}"). Weights are
/// [out, in, kh, kw], biases [out].
std::map<std::string, std::vector<std::uint64_t>> neural_tensor_inventory(
    const LevelWidths& widths);

/// Builds a weight set with every inventory tensor filled by fill(name, index).
WeightFile make_neural_weights(const LevelWidths& widths,
                               const std::function<float(const std::string&, std::size_t)>& fill);

/// Executes VGG-19 encoders and their mirrored decoders: 3x3 convolutions with
/// reflection padding, ReLU, 2x2 max pooling (encoder) and nearest 2x
/// upsampling (decoder). A default-constructed codec is not ready.
class NeuralCodec final : public Codec {
 public:
  NeuralCodec() = default;
  /// Throws IncompleteWeights naming the first missing tensor, ShapeMismatch
  /// for a tensor of the wrong shape.
  explicit NeuralCodec(const WeightFile& weights);

  static NeuralCodec load_weights(const std::filesystem::path& path);

  std::string id() const override;
  CodecLevelSpec level_spec(int level) const override;
  bool ready() const noexcept { return ready_; }
  const LevelWidths& widths() const noexcept { return widths_; }
  const std::map<std::string, std::uint32_t>& checksums() const noexcept { return checksums_; }

 protected:
  FeatureMap encode_padded(const ImageTensor& image, int level) const override;
  ImageTensor decode_grid(const FeatureMap& features, int level) const override;
  void ensure_ready() const override;

 private:
  bool ready_ = false;
  LevelWidths widths_{};
  std::array<ConvNet, kNumLevels> encoders_;
  std::array<ConvNet, kNumLevels> decoders_;
  std::map<std::string, std::uint32_t> checksums_;
  std::uint32_t digest_ = 0;
};

/// "analytic" or a neural codec read from weights_path.
std::unique_ptr<Codec> make_codec(const std::string& kind,
                                  const std::filesystem::path& weights_path = {});

}  // namespace gwct
