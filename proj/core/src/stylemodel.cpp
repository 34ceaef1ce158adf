#include "gwct/stylemodel.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <string>

#include "gwct/error.hpp"
#include "gwct/tensorops.hpp"
#include "parallel.hpp"

namespace gwct {

RankPolicy RankPolicy::fixed(int rank) {
  if (rank < 1) {
    throw Error(ErrorCode::InvalidRank, "fixed CP rank must be >= 1, got " + std::to_string(rank));
  }
  return RankPolicy(Kind::Fixed, rank);
}

RankPolicy RankPolicy::parse(std::string_view text) {
  if (text == "adaptive") return adaptive();
  if (text == "full") return full();
  int rank = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), rank);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidRank,
                "rank must be 'adaptive', 'full' or a positive integer, got '" +
                    std::string(text) + "'");
  }
  return fixed(rank);
}

Eigen::Index RankPolicy::rank_for(Eigen::Index channels, Eigen::Index n_styles) const noexcept {
  switch (kind_) {
    case Kind::Adaptive: return channels;
    case Kind::Full: return std::min(n_styles * channels, channels * channels);
    case Kind::Fixed: return rank_;
  }
  return channels;
}

std::string RankPolicy::to_string() const {
  switch (kind_) {
    case Kind::Adaptive: return "adaptive";
    case Kind::Full: return "full";
    case Kind::Fixed: return std::to_string(rank_);
  }
  return "adaptive";
}

ClassCountTable::ClassCountTable(int images, int classes)
    : n_images(images), n_classes(classes),
      counts(static_cast<std::size_t>(images) * static_cast<std::size_t>(classes), 0) {}

StyleWeights class_weights(const ClassCountTable& counts, int class_id,
                           std::span<const int> images) {
  if (class_id < 0 || class_id >= counts.n_classes) {
    throw Error(ErrorCode::IndexOutOfRange, "class " + std::to_string(class_id) + " not in table");
  }
  std::vector<int> all;
  if (images.empty()) {
    all.resize(static_cast<std::size_t>(counts.n_images));
    std::iota(all.begin(), all.end(), 0);
    images = all;
  }
  std::vector<double> w;
  w.reserve(images.size());
  double total = 0.0;
  for (int j : images) {
    if (j < 0 || j >= counts.n_images) {
      throw Error(ErrorCode::IndexOutOfRange, "image " + std::to_string(j) + " not in table");
    }
    const auto c = static_cast<double>(counts.at(j, class_id));
    w.push_back(c);
    total += c;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::ClassAbsent,
                "class " + std::to_string(class_id) + " has no pixels in the style images");
  }
  for (double& v : w) v /= total;
  return StyleWeights(std::move(w));
}

const LevelEntry& StyleModel::level(int lvl) const {
  if (lvl < 1 || lvl > static_cast<int>(levels.size())) {
    throw Error(ErrorCode::LevelMismatch,
                "style model has levels 1.." + std::to_string(levels.size()) + ", level " +
                    std::to_string(lvl) + " requested");
  }
  return levels[static_cast<std::size_t>(lvl - 1)];
}

const ClassEntry& StyleModel::entry(int lvl, int cls) const {
  const auto& l = level(lvl);
  if (cls < 0 || cls >= static_cast<int>(l.classes.size())) {
    throw Error(ErrorCode::IndexOutOfRange, "class " + std::to_string(cls) + " not in model");
  }
  return l.classes[static_cast<std::size_t>(cls)];
}

StyleModel build_style_model(std::span<const ImageTensor> images,
                             std::span<const LabelMask> masks, const Codec& codec,
                             const BuildOptions& options) {
  if (images.empty()) throw Error(ErrorCode::EmptyStyleSet, "no style images supplied");
  if (images.size() != masks.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(images.size()) + " style images but " +
                    std::to_string(masks.size()) + " masks");
  }
  if (options.depth < 1 || options.depth > kNumLevels) {
    throw Error(ErrorCode::InvalidArgument, "depth must be in 1..5");
  }
  if (options.min_pixels < 1) {
    throw Error(ErrorCode::InvalidArgument, "min_pixels must be >= 1");
  }
  int n_classes = options.num_classes;
  std::uint16_t max_label = 0;
  for (std::size_t j = 0; j < images.size(); ++j) {
    if (images[j].height != masks[j].height || images[j].width != masks[j].width) {
      throw Error(ErrorCode::ShapeMismatch,
                  "style image " + std::to_string(j) + " and its mask differ in size");
    }
    max_label = std::max(max_label, masks[j].max_label());
  }
  if (n_classes == 0) n_classes = max_label + 1;
  if (max_label >= n_classes) {
    throw Error(ErrorCode::InvalidArgument,
                "mask label " + std::to_string(max_label) + " exceeds class count " +
                    std::to_string(n_classes));
  }
  if (!options.class_names.empty() &&
      static_cast<int>(options.class_names.size()) != n_classes) {
    throw Error(ErrorCode::InvalidArgument, "class name list does not match class count");
  }

  const int n_images = static_cast<int>(images.size());
  StyleModel model;
  model.n_styles = n_images;
  model.n_classes = n_classes;
  model.depth = options.depth;
  model.codec_id = codec.id();
  model.seed = options.seed;
  model.rank_policy = options.rank_policy;
  model.min_pixels = options.min_pixels;
  model.max_iters = options.max_iters;
  model.tol = options.tol;
  model.class_names = options.class_names;
  model.counts = ClassCountTable(n_images, n_classes);
  for (int j = 0; j < n_images; ++j) {
    for (auto label : masks[static_cast<std::size_t>(j)].labels) ++model.counts.at(j, label);
  }

  // stats[level-1][image][class]; count 0 marks an excluded image.
  using PerImage = std::vector<FeatureStats>;
  std::vector<std::vector<PerImage>> stats(
      static_cast<std::size_t>(options.depth),
      std::vector<PerImage>(images.size(), PerImage(static_cast<std::size_t>(n_classes))));

  const std::size_t encode_jobs = images.size() * static_cast<std::size_t>(options.depth);
  detail::parallel_for(encode_jobs, options.workers, [&](std::size_t job) {
    const std::size_t j = job / static_cast<std::size_t>(options.depth);
    const int level = static_cast<int>(job % static_cast<std::size_t>(options.depth)) + 1;
    const FeatureMap f = codec.encode(images[j], level);
    const LabelMask grid = downsample_mask(masks[j], codec.level_spec(level).spatial_divisor);
    const auto columns = class_columns(grid, n_classes);
    auto& out = stats[static_cast<std::size_t>(level - 1)][j];
    for (int c = 0; c < n_classes; ++c) {
      const auto& cols = columns[static_cast<std::size_t>(c)];
      if (static_cast<int>(cols.size()) < options.min_pixels) continue;
      out[static_cast<std::size_t>(c)] = compute_stats(f.data(Eigen::all, cols));
    }
  });

  model.levels.resize(static_cast<std::size_t>(options.depth));
  for (int level = 1; level <= options.depth; ++level) {
    auto& entry = model.levels[static_cast<std::size_t>(level - 1)];
    entry.level = level;
    entry.channels = codec.level_spec(level).channels;
    entry.classes.resize(static_cast<std::size_t>(n_classes));
  }

  const std::size_t cp_jobs = static_cast<std::size_t>(options.depth) *
                              static_cast<std::size_t>(n_classes);
  detail::parallel_for(cp_jobs, options.workers, [&](std::size_t job) {
    const auto li = job / static_cast<std::size_t>(n_classes);
    const auto c = job % static_cast<std::size_t>(n_classes);
    auto& level = model.levels[li];
    ClassEntry& ce = level.classes[c];
    std::vector<Eigen::MatrixXd> stack;
    for (int j = 0; j < n_images; ++j) {
      const FeatureStats& s = stats[li][static_cast<std::size_t>(j)][c];
      if (s.count == 0) continue;
      ce.participants.push_back(j);
      ce.participant_cells.push_back(static_cast<std::uint64_t>(s.count));
      stack.push_back(s.cov);
    }
    if (stack.empty()) return;
    ce.present = true;
    ce.means.resize(static_cast<Eigen::Index>(stack.size()), level.channels);
    for (std::size_t k = 0; k < ce.participants.size(); ++k) {
      ce.means.row(static_cast<Eigen::Index>(k)) =
          stats[li][static_cast<std::size_t>(ce.participants[k])][c].mean.transpose();
    }
    CpOptions cp;
    cp.rank = options.rank_policy.rank_for(level.channels, static_cast<Eigen::Index>(stack.size()));
    cp.seed = options.seed;
    cp.max_iters = options.max_iters;
    cp.tol = options.tol;
    CpResult fit = cp_decompose(stack, cp);
    ce.factors = std::move(fit.factors);
    ce.fit_error = fit.relative_error;
    ce.iterations = fit.iterations;
  });
  return model;
}

}  // namespace gwct
