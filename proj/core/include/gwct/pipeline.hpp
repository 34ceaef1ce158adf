#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gwct/codec.hpp"
#include "gwct/cpd.hpp"
#include "gwct/error.hpp"
#include "gwct/stylemodel.hpp"

namespace gwct {

inline constexpr int kDefaultDepth = 4;
inline constexpr double kDefaultAlpha = 0.6;

/// How the style images of a model are mixed for one class. Explicit weights
/// span all model styles and are restricted (and renormalized) to the images
/// that actually contain the class.
struct StyleMix {
  enum class Mode { ByCount, Uniform, Explicit };
  Mode mode = Mode::ByCount;
  std::vector<double> weights;  // Explicit only, length = model.n_styles

  static StyleMix by_count() { return {}; }
  static StyleMix uniform() { return {Mode::Uniform, {}}; }
  static StyleMix explicit_weights(const StyleWeights& w) {
    return {Mode::Explicit, {w.values().begin(), w.values().end()}};
  }
};

struct BlendSpec {
  StyleMix mix;
  std::map<int, StyleMix> class_mix;  // overrides `mix` per class
  double alpha = kDefaultAlpha;
  std::map<int, double> class_alpha;  // overrides `alpha` per class
  std::set<int> pass_through;         // classes left untouched
  int depth = kDefaultDepth;
  double eps = kDefaultWhiteningEps;

  double alpha_for(int cls) const;
  const StyleMix& mix_for(int cls) const;
  /// Throws InvalidAlpha / InvalidWeights / InvalidArgument.
  void validate(const StyleModel& model) const;
};

struct LevelWarning {
  int cls = -1;
  std::string message;
};

struct LevelReport {
  int level = 0;
  double milliseconds = 0.0;
  std::map<int, std::uint64_t> class_cells;  // content cells per class at this level
  std::vector<LevelWarning> warnings;
  int clamped_eigenvalues = 0;
};

struct StylizeReport {
  std::vector<LevelReport> levels;  // in execution order (depth first)
  std::size_t warning_count() const noexcept;
};

/// Participant weights used for one (level, class), or nullopt when the mix
/// gives no mass to any image containing the class.
std::optional<StyleWeights> resolve_class_weights(const StyleModel& model, int level, int cls,
                                                  const StyleMix& mix);

/// Label-to-label transform of one level. Classes absent from the model (or
/// from every selected style image) pass through unchanged with a warning;
/// classes with alpha 0 or marked pass-through are copied bitwise.
FeatureMap stylize_level(const FeatureMap& content, const LabelMask& grid_mask,
                         const StyleModel& model, int level, const BlendSpec& spec,
                         LevelReport* report = nullptr);

struct StylizeResult {
  ImageTensor image;
  StylizeReport report;
};

/// Cascade from level spec.depth down to 1: each level encodes the current
/// image, transforms the features and decodes back to pixels.
StylizeResult stylize_image(const ImageTensor& content, const LabelMask& mask,
                            const StyleModel& model, const Codec& codec, const BlendSpec& spec);

struct Frame {
  ImageTensor image;
  LabelMask mask;
};

struct FrameResult {
  std::size_t index = 0;
  std::optional<ImageTensor> image;  // empty when the frame failed
  StylizeReport report;
  std::optional<ErrorCode> error_code;
  std::string error;
  double milliseconds = 0.0;
};

struct SequenceOptions {
  int workers = 1;
  /// Frames allowed between the oldest undelivered one and the newest started.
  std::size_t max_in_flight = 0;  // 0: 2 * workers
};

struct SequenceSummary {
  std::size_t frames = 0;
  std::size_t failed = 0;
};

/// Stylizes frames 0..count-1 on a worker pool. `load` runs on the workers and
/// may throw; a failing frame is reported through the sink and the stream
/// continues. `sink` receives results strictly in frame order, one at a time.
SequenceSummary stylize_sequence(std::size_t count,
                                 const std::function<Frame(std::size_t)>& load,
                                 const std::function<void(FrameResult&&)>& sink,
                                 const StyleModel& model, const Codec& codec,
                                 const BlendSpec& spec, const SequenceOptions& options = {});

std::vector<FrameResult> stylize_sequence(std::span<const Frame> frames, const StyleModel& model,
                                          const Codec& codec, const BlendSpec& spec,
                                          const SequenceOptions& options = {});

struct GridCell {
  int row = 0;  // v index
  int col = 0;  // u index
  double u = 0.0;
  double v = 0.0;
  StyleWeights weights = StyleWeights::uniform(4);
  ImageTensor image;
};

/// Bilinear corner weights [(1-u)(1-v), u(1-v), (1-u)v, uv] for a k x k grid
/// with u = col / (k-1) and v = row / (k-1), row-major. Throws
/// InvalidArgument for k < 2.
std::vector<StyleWeights> grid_weights(int k);

/// Every cell is a full stylization with its grid weights as the global mix.
/// Throws GridRequiresFourStyles unless the model has exactly four styles.
std::vector<GridCell> interpolation_grid(const ImageTensor& content, const LabelMask& mask,
                                         const StyleModel& model, const Codec& codec, int k,
                                         const BlendSpec& spec, int workers = 1);

/// Tiles row-major cells (all the same size) into one k x k mosaic.
ImageTensor compose_grid(const std::vector<GridCell>& cells, int k);

}  // namespace gwct
