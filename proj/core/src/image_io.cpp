#include "gwct/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include <png.h>

#include "gwct/error.hpp"

namespace gwct {

namespace {

struct PngImage {
  png_image img;
  PngImage() {
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::vector<png_byte> read_png(const std::filesystem::path& path, png_uint_32 format,
                               bool reject_colour, int& height, int& width) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.img, path.string().c_str())) {
    throw Error(std::filesystem::is_regular_file(path) ? ErrorCode::FormatError
                                                       : ErrorCode::IoError,
                "cannot read PNG " + path.string() + ": " + png.img.message);
  }
  if (reject_colour && (png.img.format & PNG_FORMAT_FLAG_COLOR) != 0 &&
      (png.img.format & PNG_FORMAT_FLAG_COLORMAP) == 0) {
    throw Error(ErrorCode::FormatError,
                "mask " + path.string() + " must be a single-channel PNG");
  }
  png.img.format = format;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(png.img));
  if (!png_image_finish_read(&png.img, nullptr, buf.data(), 0, nullptr)) {
    throw Error(ErrorCode::FormatError,
                "cannot decode PNG " + path.string() + ": " + png.img.message);
  }
  height = static_cast<int>(png.img.height);
  width = static_cast<int>(png.img.width);
  return buf;
}

void write_png(const std::filesystem::path& path, png_uint_32 format, int height, int width,
               const std::vector<png_byte>& buf) {
  PngImage png;
  png.img.width = static_cast<png_uint_32>(width);
  png.img.height = static_cast<png_uint_32>(height);
  png.img.format = format;
  if (!png_image_write_to_file(&png.img, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoError,
                "cannot write PNG " + path.string() + ": " + png.img.message);
  }
}

}  // namespace

ImageTensor read_image_png(const std::filesystem::path& path) {
  int h = 0;
  int w = 0;
  const auto buf = read_png(path, PNG_FORMAT_RGB, false, h, w);
  ImageTensor image(h, w);
  for (Eigen::Index p = 0; p < image.pixels.cols(); ++p) {
    for (int c = 0; c < 3; ++c) {
      image.pixels(c, p) = static_cast<double>(buf[static_cast<std::size_t>(p) * 3 + c]) / 255.0;
    }
  }
  return image;
}

void write_image_png(const std::filesystem::path& path, const ImageTensor& image) {
  std::vector<png_byte> buf(static_cast<std::size_t>(image.pixels.cols()) * 3);
  for (Eigen::Index p = 0; p < image.pixels.cols(); ++p) {
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(image.pixels(c, p), 0.0, 1.0);
      buf[static_cast<std::size_t>(p) * 3 + c] = static_cast<png_byte>(std::lround(v * 255.0));
    }
  }
  write_png(path, PNG_FORMAT_RGB, image.height, image.width, buf);
}

LabelMask read_mask_png(const std::filesystem::path& path) {
  int h = 0;
  int w = 0;
  const auto buf = read_png(path, PNG_FORMAT_GRAY, true, h, w);
  std::vector<std::uint16_t> labels(buf.begin(), buf.end());
  return LabelMask(h, w, std::move(labels));
}

void write_mask_png(const std::filesystem::path& path, const LabelMask& mask) {
  std::vector<png_byte> buf(mask.labels.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (mask.labels[i] > 255) {
      throw Error(ErrorCode::InvalidArgument, "8-bit mask cannot hold labels above 255");
    }
    buf[i] = static_cast<png_byte>(mask.labels[i]);
  }
  write_png(path, PNG_FORMAT_GRAY, mask.height, mask.width, buf);
}

std::vector<std::filesystem::path> list_png_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::IoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace gwct
