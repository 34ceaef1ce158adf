#include "gwct/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "gwct/tensorops.hpp"
#include "parallel.hpp"

namespace gwct {

namespace {

std::string class_label(const StyleModel& model, int cls) {
  if (cls >= 0 && cls < static_cast<int>(model.class_names.size())) {
    return model.class_names[static_cast<std::size_t>(cls)] + " (" + std::to_string(cls) + ")";
  }
  return std::to_string(cls);
}

void validate_mix(const StyleMix& mix, const StyleModel& model) {
  if (mix.mode != StyleMix::Mode::Explicit) return;
  if (static_cast<int>(mix.weights.size()) != model.n_styles) {
    throw Error(ErrorCode::ShapeMismatch,
                "weight vector has " + std::to_string(mix.weights.size()) +
                    " entries but the model has " + std::to_string(model.n_styles) + " styles");
  }
  StyleWeights check(mix.weights);  // throws InvalidWeights if not l1-normalized
  (void)check;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

double BlendSpec::alpha_for(int cls) const {
  auto it = class_alpha.find(cls);
  return it == class_alpha.end() ? alpha : it->second;
}

const StyleMix& BlendSpec::mix_for(int cls) const {
  auto it = class_mix.find(cls);
  return it == class_mix.end() ? mix : it->second;
}

void BlendSpec::validate(const StyleModel& model) const {
  auto check_alpha = [](double a) {
    if (!(a >= 0.0 && a <= 1.0)) {
      throw Error(ErrorCode::InvalidAlpha, "alpha must lie in [0, 1], got " + std::to_string(a));
    }
  };
  check_alpha(alpha);
  for (const auto& [cls, a] : class_alpha) {
    if (cls < 0 || (cls >= model.n_classes && pass_through.count(cls) == 0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "alpha given for class " + std::to_string(cls) + " which the model lacks");
    }
    check_alpha(a);
  }
  validate_mix(mix, model);
  for (const auto& [cls, m] : class_mix) {
    if (cls < 0 || cls >= model.n_classes) {
      throw Error(ErrorCode::InvalidArgument,
                  "weights given for class " + std::to_string(cls) + " which the model lacks");
    }
    validate_mix(m, model);
  }
  if (depth < 1 || depth > kNumLevels) {
    throw Error(ErrorCode::InvalidArgument, "depth must be in 1..5, got " + std::to_string(depth));
  }
  if (depth > model.depth) {
    throw Error(ErrorCode::LevelMismatch, "depth " + std::to_string(depth) +
                                              " exceeds the model depth " +
                                              std::to_string(model.depth));
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
}

std::size_t StylizeReport::warning_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : levels) n += l.warnings.size();
  return n;
}

std::optional<StyleWeights> resolve_class_weights(const StyleModel& model, int level, int cls,
                                                  const StyleMix& mix) {
  const ClassEntry& entry = model.entry(level, cls);
  if (!entry.present) return std::nullopt;
  switch (mix.mode) {
    case StyleMix::Mode::ByCount:
      return class_weights(model.counts, cls, entry.participants);
    case StyleMix::Mode::Uniform:
      return StyleWeights::uniform(entry.participants.size());
    case StyleMix::Mode::Explicit: {
      std::vector<double> w;
      w.reserve(entry.participants.size());
      double total = 0.0;
      for (int j : entry.participants) {
        const double v = mix.weights.at(static_cast<std::size_t>(j));
        w.push_back(v);
        total += v;
      }
      if (!(total > 0.0)) return std::nullopt;
      // A mix already concentrated on the participants is used verbatim, so
      // one-hot and exactly-normalized inputs are not perturbed by division.
      if (total == 1.0) return StyleWeights(std::move(w));
      return StyleWeights::normalized(std::move(w));
    }
  }
  return std::nullopt;
}

FeatureMap stylize_level(const FeatureMap& content, const LabelMask& grid_mask,
                         const StyleModel& model, int level, const BlendSpec& spec,
                         LevelReport* report) {
  const LevelEntry& lvl = model.level(level);
  if (content.channels() != lvl.channels) {
    throw Error(ErrorCode::ShapeMismatch,
                "level " + std::to_string(level) + " model has " + std::to_string(lvl.channels) +
                    " channels, content features have " + std::to_string(content.channels()));
  }
  if (grid_mask.height != content.height || grid_mask.width != content.width) {
    throw Error(ErrorCode::ShapeMismatch, "content mask is not aligned with the feature grid");
  }
  if (report != nullptr) report->level = level;

  FeatureMap out = content;
  const int label_space = std::max<int>(model.n_classes, grid_mask.max_label() + 1);
  const auto columns = class_columns(grid_mask, label_space);
  for (int cls = 0; cls < label_space; ++cls) {
    const auto& cols = columns[static_cast<std::size_t>(cls)];
    if (cols.empty()) continue;
    if (report != nullptr) report->class_cells[cls] = cols.size();
    if (spec.pass_through.count(cls) != 0) continue;
    const double alpha = spec.alpha_for(cls);
    if (cls >= model.n_classes || !lvl.classes[static_cast<std::size_t>(cls)].present) {
      if (report != nullptr) {
        report->warnings.push_back(
            {cls, "class " + class_label(model, cls) + " is absent from the style model at level " +
                      std::to_string(level) + "; left unstylized"});
      }
      continue;
    }
    if (alpha == 0.0) continue;
    const auto weights = resolve_class_weights(model, level, cls, spec.mix_for(cls));
    if (!weights) {
      if (report != nullptr) {
        report->warnings.push_back(
            {cls, "weights select no style image containing class " + class_label(model, cls) +
                      " at level " + std::to_string(level) + "; left unstylized"});
      }
      continue;
    }
    const ClassEntry& entry = lvl.classes[static_cast<std::size_t>(cls)];
    const Eigen::MatrixXd region = content.data(Eigen::all, cols);
    const WhiteningTransform whitening = make_whitening(compute_stats(region), spec.eps);
    const ColoringTransform coloring = make_coloring(reconstruct_blend(entry.factors, *weights),
                                                     blend_means(entry.means, *weights));
    const Eigen::MatrixXd stylized = apply(coloring, apply(whitening, region));
    out.data(Eigen::all, cols) = blend_columns(region, stylized, alpha);
    if (report != nullptr) report->clamped_eigenvalues += whitening.clamped + coloring.clamped;
  }
  return out;
}

StylizeResult stylize_image(const ImageTensor& content, const LabelMask& mask,
                            const StyleModel& model, const Codec& codec, const BlendSpec& spec) {
  if (content.height != mask.height || content.width != mask.width) {
    throw Error(ErrorCode::ShapeMismatch, "content image and mask differ in size");
  }
  if (model.codec_id != codec.id()) {
    throw Error(ErrorCode::InvalidArgument, "style model was built with codec '" +
                                                model.codec_id + "', not '" + codec.id() + "'");
  }
  spec.validate(model);
  StylizeResult result;
  ImageTensor current = content;
  for (int level = spec.depth; level >= 1; --level) {
    const auto start = std::chrono::steady_clock::now();
    LevelReport lr;
    const FeatureMap features = codec.encode(current, level);
    const LabelMask grid = downsample_mask(mask, codec.level_spec(level).spatial_divisor);
    const FeatureMap styled = stylize_level(features, grid, model, level, spec, &lr);
    current = codec.decode(styled, level, content.size());
    lr.milliseconds = elapsed_ms(start);
    result.report.levels.push_back(std::move(lr));
  }
  result.image = std::move(current);
  return result;
}

std::vector<StyleWeights> grid_weights(int k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "grid size must be >= 2");
  std::vector<StyleWeights> out;
  out.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  const double step = 1.0 / static_cast<double>(k - 1);
  for (int row = 0; row < k; ++row) {
    const double v = row == k - 1 ? 1.0 : row * step;
    for (int col = 0; col < k; ++col) {
      const double u = col == k - 1 ? 1.0 : col * step;
      out.push_back(StyleWeights::normalized(
          {(1.0 - u) * (1.0 - v), u * (1.0 - v), (1.0 - u) * v, u * v}));
    }
  }
  return out;
}

std::vector<GridCell> interpolation_grid(const ImageTensor& content, const LabelMask& mask,
                                         const StyleModel& model, const Codec& codec, int k,
                                         const BlendSpec& spec, int workers) {
  if (model.n_styles != 4) {
    throw Error(ErrorCode::GridRequiresFourStyles,
                "interpolation grid needs a model with 4 styles, this one has " +
                    std::to_string(model.n_styles));
  }
  const auto weights = grid_weights(k);
  std::vector<GridCell> cells(weights.size());
  detail::parallel_for(cells.size(), workers, [&](std::size_t i) {
    GridCell& cell = cells[i];
    cell.row = static_cast<int>(i) / k;
    cell.col = static_cast<int>(i) % k;
    cell.u = static_cast<double>(cell.col) / (k - 1);
    cell.v = static_cast<double>(cell.row) / (k - 1);
    cell.weights = weights[i];
    BlendSpec cell_spec = spec;
    cell_spec.mix = StyleMix::explicit_weights(weights[i]);
    cell_spec.class_mix.clear();
    cell.image = stylize_image(content, mask, model, codec, cell_spec).image;
  });
  return cells;
}

ImageTensor compose_grid(const std::vector<GridCell>& cells, int k) {
  if (cells.size() != static_cast<std::size_t>(k) * static_cast<std::size_t>(k) || k < 1) {
    throw Error(ErrorCode::ShapeMismatch, "grid needs k*k cells");
  }
  const int h = cells.front().image.height;
  const int w = cells.front().image.width;
  ImageTensor out(h * k, w * k);
  for (const auto& cell : cells) {
    if (cell.image.height != h || cell.image.width != w) {
      throw Error(ErrorCode::ShapeMismatch, "grid cells differ in size");
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        out.pixels.col(static_cast<Eigen::Index>(cell.row * h + y) * out.width + cell.col * w + x) =
            cell.image.pixels.col(static_cast<Eigen::Index>(y) * w + x);
      }
    }
  }
  return out;
}

}  // namespace gwct
