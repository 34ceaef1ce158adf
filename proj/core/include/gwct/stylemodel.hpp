#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gwct/codec.hpp"
#include "gwct/cpd.hpp"
#include "gwct/image.hpp"
#include "gwct/label_mask.hpp"

namespace gwct {

/// How the CP rank of each (level, class) stack is chosen.
///   adaptive: channel count of the level
///   full:     min(N * C, C * C), enough for an exact reconstruction
///   fixed:    a constant R
class RankPolicy {
 public:
  enum class Kind : std::uint8_t { Adaptive = 0, Full = 1, Fixed = 2 };

  static RankPolicy adaptive() { return RankPolicy(Kind::Adaptive, 0); }
  static RankPolicy full() { return RankPolicy(Kind::Full, 0); }
  static RankPolicy fixed(int rank);
  /// "adaptive", "full" or a positive integer.
  static RankPolicy parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  int fixed_rank() const noexcept { return rank_; }
  Eigen::Index rank_for(Eigen::Index channels, Eigen::Index n_styles) const noexcept;
  std::string to_string() const;

  friend bool operator==(const RankPolicy&, const RankPolicy&) = default;

 private:
  RankPolicy(Kind kind, int rank) : kind_(kind), rank_(rank) {}
  Kind kind_ = Kind::Adaptive;
  int rank_ = 0;
};

/// Pixel count of every class in every style image, at image resolution.
struct ClassCountTable {
  int n_images = 0;
  int n_classes = 0;
  std::vector<std::uint64_t> counts;  // row-major n_images x n_classes

  ClassCountTable() = default;
  ClassCountTable(int n_images, int n_classes);

  std::uint64_t at(int image, int cls) const {
    return counts[static_cast<std::size_t>(image) * static_cast<std::size_t>(n_classes) +
                  static_cast<std::size_t>(cls)];
  }
  std::uint64_t& at(int image, int cls) {
    return counts[static_cast<std::size_t>(image) * static_cast<std::size_t>(n_classes) +
                  static_cast<std::size_t>(cls)];
  }
};

/// Weights over `images` (all images when empty) proportional to their pixel
/// count of class_id. Throws ClassAbsent when every count is zero.
StyleWeights class_weights(const ClassCountTable& counts, int class_id,
                           std::span<const int> images = {});

struct ClassEntry {
  bool present = false;
  std::vector<int> participants;                 // style image indices
  std::vector<std::uint64_t> participant_cells;  // class cells at feature resolution
  Eigen::MatrixXd means;                         // participants x C
  CpFactors factors;
  double fit_error = 0.0;
  int iterations = 0;
};

struct LevelEntry {
  int level = 1;
  int channels = 0;
  std::vector<ClassEntry> classes;
};

struct StyleModel {
  int n_styles = 0;
  int n_classes = 0;
  int depth = 0;
  std::string codec_id;
  std::uint64_t seed = 0;
  RankPolicy rank_policy = RankPolicy::adaptive();
  int min_pixels = 16;
  int max_iters = 500;
  double tol = 1e-8;
  std::vector<std::string> class_names;  // empty or n_classes entries
  ClassCountTable counts;
  std::vector<LevelEntry> levels;  // levels[k - 1] holds level k

  /// Throws LevelMismatch if the level was not built.
  const LevelEntry& level(int level) const;
  const ClassEntry& entry(int level, int cls) const;
};

struct BuildOptions {
  int depth = 4;
  RankPolicy rank_policy = RankPolicy::adaptive();
  std::uint64_t seed = 0;
  int min_pixels = 16;
  int max_iters = 500;
  double tol = 1e-8;
  int num_classes = 0;  // 0: one past the largest label seen
  int workers = 1;
  std::vector<std::string> class_names;
};

/// Encodes every style image once per level, gathers masked per-class
/// statistics and CP-decomposes each surviving (level, class) covariance
/// stack. Images with fewer than min_pixels class cells at a level are left
/// out of that class's stack; a class left with no images is marked absent.
StyleModel build_style_model(std::span<const ImageTensor> images,
                             std::span<const LabelMask> masks, const Codec& codec,
                             const BuildOptions& options);

/// "GWCTM1" container with a CRC-32 per section; see docs/formats.md.
std::vector<std::uint8_t> serialize_model(const StyleModel& model);
StyleModel parse_model(std::span<const std::uint8_t> bytes);
void save_model(const StyleModel& model, const std::filesystem::path& path);
StyleModel load_model(const std::filesystem::path& path);

}  // namespace gwct
