#include "gwct/codec.hpp"

#include <string>

#include "gwct/error.hpp"

namespace gwct {

void Codec::check_level(int level) {
  if (level < 1 || level > kNumLevels) {
    throw Error(ErrorCode::LevelMismatch,
                "codec level " + std::to_string(level) + " outside 1..5");
  }
}

FeatureMap Codec::encode(const ImageTensor& image, int level) const {
  check_level(level);
  ensure_ready();
  const int d = level_spec(level).spatial_divisor;
  return encode_padded(reflect_pad(image, round_up(image.height, d), round_up(image.width, d)),
                       level);
}

ImageTensor Codec::decode(const FeatureMap& features, int level,
                          std::optional<ImageSize> output_size) const {
  check_level(level);
  ensure_ready();
  const auto spec = level_spec(level);
  if (features.channels() != spec.channels) {
    throw Error(ErrorCode::ShapeMismatch,
                "level " + std::to_string(level) + " expects " +
                    std::to_string(spec.channels) + " channels, got " +
                    std::to_string(features.channels()));
  }
  ImageTensor image = decode_grid(features, level);
  if (output_size) {
    const int d = spec.spatial_divisor;
    if (round_up(output_size->height, d) != image.height ||
        round_up(output_size->width, d) != image.width) {
      throw Error(ErrorCode::ShapeMismatch, "requested output size does not match feature grid");
    }
    image = crop(image, output_size->height, output_size->width);
  }
  return clamp_unit(std::move(image));
}

std::unique_ptr<Codec> make_codec(const std::string& kind,
                                  const std::filesystem::path& weights_path) {
  if (kind == "analytic") return std::make_unique<AnalyticCodec>();
  if (kind == "neural") {
    if (weights_path.empty()) {
      throw Error(ErrorCode::CodecNotReady, "neural codec requires a weight file");
    }
    return std::make_unique<NeuralCodec>(NeuralCodec::load_weights(weights_path));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown codec '" + kind + "'");
}

}  // namespace gwct
