#include "gwct/binary_io.hpp"

#include <fstream>
#include <iterator>

#include <zlib.h>

#include "gwct/error.hpp"

namespace gwct::io {

void ByteReader::need(std::size_t n) const {
  if (n > data_.size() - pos_) {
    throw Error(ErrorCode::FormatError,
                "unexpected end of data at byte " + std::to_string(pos_) + " (need " +
                    std::to_string(n) + " more)");
  }
}

std::span<const std::uint8_t> ByteReader::bytes(std::size_t n) {
  need(n);
  auto out = data_.subspan(pos_, n);
  pos_ += n;
  return out;
}

std::string ByteReader::raw(std::size_t n) {
  auto b = bytes(n);
  return std::string(b.begin(), b.end());
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < data.size(); off += kChunk) {
    const std::size_t len = std::min(kChunk, data.size() - off);
    crc = ::crc32(crc, data.data() + off, static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
}

}  // namespace gwct::io
