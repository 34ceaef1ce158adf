#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gwct {

struct NamedTensor {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<float> data;  // row-major

  std::uint64_t element_count() const noexcept;
};

/// Ordered float32 tensor container ("GWCTW1"). Layout, all little-endian:
///
///   magic   6 bytes  "GWCTW1"
///   version u16      = 1
///   count   u32
///   count x { name_len u32, name bytes, rank u32, dims u64[rank], data f32[prod(dims)] }
///
/// Nothing may follow the last tensor.
class WeightFile {
 public:
  static constexpr std::string_view kMagic = "GWCTW1";
  static constexpr std::uint16_t kVersion = 1;

  /// Throws FormatError on a duplicate name or a payload/shape size mismatch.
  void add(NamedTensor tensor);
  const NamedTensor* find(std::string_view name) const noexcept;
  const std::vector<NamedTensor>& tensors() const noexcept { return tensors_; }

  std::vector<std::uint8_t> serialize() const;
  static WeightFile parse(std::span<const std::uint8_t> bytes);

  void save(const std::filesystem::path& path) const;
  static WeightFile load(const std::filesystem::path& path);

 private:
  std::vector<NamedTensor> tensors_;
};

/// CRC-32 of a tensor's little-endian float payload.
std::uint32_t tensor_checksum(const NamedTensor& tensor);

}  // namespace gwct
