#include "gwct/label_mask.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gwct/error.hpp"
#include "gwct/image.hpp"

namespace gwct {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

LabelMask::LabelMask(int h, int w, std::uint16_t fill)
    : height(h), width(w),
      labels(static_cast<std::size_t>(std::max(h, 0)) * static_cast<std::size_t>(std::max(w, 0)),
             fill) {}

LabelMask::LabelMask(int h, int w, std::vector<std::uint16_t> l)
    : height(h), width(w), labels(std::move(l)) {
  if (h < 0 || w < 0 ||
      labels.size() != static_cast<std::size_t>(h) * static_cast<std::size_t>(w)) {
    throw Error(ErrorCode::ShapeMismatch, "label vector does not match mask size");
  }
}

std::uint16_t LabelMask::max_label() const noexcept {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

LabelMask downsample_mask(const LabelMask& mask, int divisor) {
  if (divisor < 1) throw Error(ErrorCode::InvalidArgument, "divisor must be >= 1");
  if (divisor == 1) return mask;
  const int gh = round_up(mask.height, divisor) / divisor;
  const int gw = round_up(mask.width, divisor) / divisor;
  LabelMask out(gh, gw);
  const int centre = divisor / 2;
  for (int y = 0; y < gh; ++y) {
    const int sy = reflect_index(y * divisor + centre, mask.height);
    for (int x = 0; x < gw; ++x) {
      const int sx = reflect_index(x * divisor + centre, mask.width);
      out.labels[static_cast<std::size_t>(y) * gw + x] = mask.at(sy, sx);
    }
  }
  return out;
}

std::vector<std::vector<Eigen::Index>> class_columns(const LabelMask& mask, int num_classes) {
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(std::max(num_classes, 0)));
  for (std::size_t j = 0; j < mask.labels.size(); ++j) {
    const auto c = mask.labels[j];
    if (c < num_classes) out[c].push_back(static_cast<Eigen::Index>(j));
  }
  return out;
}

ClassTable ClassTable::parse(std::string_view text) {
  ClassTable table;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::FormatError,
                  "class table line " + std::to_string(line_no) + ": expected index:name");
    }
    const auto idx_text = trim(line.substr(0, colon));
    const auto name = trim(line.substr(colon + 1));
    int idx = -1;
    auto [ptr, ec] = std::from_chars(idx_text.data(), idx_text.data() + idx_text.size(), idx);
    if (ec != std::errc{} || ptr != idx_text.data() + idx_text.size() || idx < 0 ||
        name.empty()) {
      throw Error(ErrorCode::FormatError,
                  "class table line " + std::to_string(line_no) + ": bad entry");
    }
    table.add(idx, std::string(name));
  }
  return table;
}

ClassTable ClassTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open class table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void ClassTable::add(int index, std::string name) {
  if (names_.count(index) != 0) {
    throw Error(ErrorCode::FormatError, "class index " + std::to_string(index) + " repeated");
  }
  if (index_of(name).has_value()) {
    throw Error(ErrorCode::FormatError, "class name '" + name + "' repeated");
  }
  names_.emplace(index, std::move(name));
}

std::optional<int> ClassTable::index_of(std::string_view name) const {
  for (const auto& [idx, n] : names_) {
    if (n == name) return idx;
  }
  return std::nullopt;
}

std::optional<std::string> ClassTable::name_of(int index) const {
  auto it = names_.find(index);
  if (it == names_.end()) return std::nullopt;
  return it->second;
}

int ClassTable::size() const noexcept {
  return names_.empty() ? 0 : names_.rbegin()->first + 1;
}

}  // namespace gwct
