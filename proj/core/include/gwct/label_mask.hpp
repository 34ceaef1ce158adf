#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gwct {

/// Per-pixel class indices, row-major.
struct LabelMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> labels;

  LabelMask() = default;
  LabelMask(int height, int width, std::uint16_t fill = 0);
  LabelMask(int height, int width, std::vector<std::uint16_t> labels);

  std::uint16_t at(int y, int x) const {
    return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(x)];
  }
  std::uint16_t max_label() const noexcept;
};

/// Nearest-neighbour reduction to the feature grid of a level with the given
/// spatial divisor. The mask is reflect-padded exactly as images are, then
/// each grid cell takes the label at the centre of its divisor x divisor block.
LabelMask downsample_mask(const LabelMask& mask, int divisor);

/// Column indices of each class; classes >= num_classes are ignored.
std::vector<std::vector<Eigen::Index>> class_columns(const LabelMask& mask, int num_classes);

/// Class-name sidecar: one "index:name" entry per line; blank lines and lines
/// beginning with '#' are skipped.
class ClassTable {
 public:
  ClassTable() = default;
  static ClassTable parse(std::string_view text);
  static ClassTable load(const std::filesystem::path& path);

  void add(int index, std::string name);
  std::optional<int> index_of(std::string_view name) const;
  std::optional<std::string> name_of(int index) const;
  const std::map<int, std::string>& entries() const noexcept { return names_; }
  bool empty() const noexcept { return names_.empty(); }
  /// One past the largest index.
  int size() const noexcept;

 private:
  std::map<int, std::string> names_;
};

}  // namespace gwct
