#include "gwct/weight_file.hpp"

#include <algorithm>
#include <limits>

#include "gwct/binary_io.hpp"
#include "gwct/error.hpp"

namespace gwct {

namespace {

std::uint64_t product(std::span<const std::uint64_t> shape) {
  std::uint64_t n = 1;
  for (auto d : shape) {
    if (d != 0 && n > std::numeric_limits<std::uint64_t>::max() / d) {
      throw Error(ErrorCode::FormatError, "tensor shape overflows");
    }
    n *= d;
  }
  return n;
}

}  // namespace

std::uint64_t NamedTensor::element_count() const noexcept {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

void WeightFile::add(NamedTensor tensor) {
  if (find(tensor.name) != nullptr) {
    throw Error(ErrorCode::FormatError, "duplicate tensor name '" + tensor.name + "'");
  }
  if (product(tensor.shape) != tensor.data.size()) {
    throw Error(ErrorCode::FormatError,
                "tensor '" + tensor.name + "' payload does not match its shape");
  }
  tensors_.push_back(std::move(tensor));
}

const NamedTensor* WeightFile::find(std::string_view name) const noexcept {
  auto it = std::find_if(tensors_.begin(), tensors_.end(),
                         [&](const NamedTensor& t) { return t.name == name; });
  return it == tensors_.end() ? nullptr : &*it;
}

std::vector<std::uint8_t> WeightFile::serialize() const {
  io::ByteWriter w;
  w.raw(kMagic);
  w.u16(kVersion);
  w.u32(static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& t : tensors_) {
    w.str(t.name);
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) w.u64(d);
    for (float v : t.data) w.f32(v);
  }
  return w.take();
}

WeightFile WeightFile::parse(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.remaining() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
    throw Error(ErrorCode::FormatError, "not a GWCTW1 weight file (bad magic)");
  }
  const auto version = r.u16();
  if (version != kVersion) {
    throw Error(ErrorCode::FormatError,
                "unsupported weight file version " + std::to_string(version));
  }
  const auto count = r.u32();
  WeightFile file;
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedTensor t;
    t.name = r.str();
    const auto rank = r.u32();
    if (rank > 8) {
      throw Error(ErrorCode::FormatError,
                  "tensor '" + t.name + "' has implausible rank " + std::to_string(rank));
    }
    t.shape.resize(rank);
    for (auto& d : t.shape) d = r.u64();
    const auto n = product(t.shape);
    if (n > r.remaining() / 4) {
      throw Error(ErrorCode::FormatError, "tensor '" + t.name + "' payload is truncated");
    }
    t.data.resize(static_cast<std::size_t>(n));
    for (auto& v : t.data) v = r.f32();
    file.add(std::move(t));
  }
  if (!r.done()) {
    throw Error(ErrorCode::FormatError, "trailing bytes after last tensor");
  }
  return file;
}

void WeightFile::save(const std::filesystem::path& path) const {
  io::write_file(path, serialize());
}

WeightFile WeightFile::load(const std::filesystem::path& path) {
  return parse(io::read_file(path));
}

std::uint32_t tensor_checksum(const NamedTensor& tensor) {
  io::ByteWriter w;
  for (float v : tensor.data) w.f32(v);
  return io::crc32(w.buffer());
}

}  // namespace gwct
