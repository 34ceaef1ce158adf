#pragma once

#include <filesystem>
#include <vector>

#include "gwct/image.hpp"
#include "gwct/label_mask.hpp"

namespace gwct {

/// 8-bit PNG in any colour type; grey is replicated and alpha dropped.
/// Values are divided by 255.
ImageTensor read_image_png(const std::filesystem::path& path);
/// Values are clamped to [0, 1] and rounded to the nearest of 256 levels.
void write_image_png(const std::filesystem::path& path, const ImageTensor& image);

/// Single-channel 8-bit PNG, pixel value = class index.
LabelMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const LabelMask& mask);

/// Sorted *.png entries of a directory (frame sequences use zero-padded names).
std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir);

}  // namespace gwct
