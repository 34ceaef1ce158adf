#include "options.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "gwct/error.hpp"

namespace gwct::cli {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + ": '" + std::string(text) + "' is not a number");
  }
  return v;
}

ConfigMap parse_config(std::string_view text) {
  ConfigMap out;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    const auto key = trim(line.substr(0, eq));
    if (eq == std::string_view::npos || key.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "config line " + std::to_string(line_no) + ": expected key=value");
    }
    if (!out.emplace(std::string(key), std::string(trim(line.substr(eq + 1)))).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "config line " + std::to_string(line_no) + ": duplicate key '" +
                      std::string(key) + "'");
    }
  }
  return out;
}

ConfigMap load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> merge_config(const std::vector<std::string>& args,
                                      const ConfigMap& config) {
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  std::vector<std::string> merged;
  merged.push_back(args.front());
  for (const auto& [key, value] : config) {
    if (given.count(key) != 0 || key == "config") continue;
    if (value == "true") {
      merged.push_back("--" + key);
    } else if (value != "false") {
      merged.push_back("--" + key + "=" + value);
    }
  }
  merged.insert(merged.end(), args.begin() + 1, args.end());
  return merged;
}

ClassResolver::ClassResolver(const std::vector<std::string>& model_names,
                             const ClassTable& sidecar, int n_classes)
    : n_classes_(n_classes) {
  for (std::size_t i = 0; i < model_names.size(); ++i) {
    by_name_.emplace(model_names[i], static_cast<int>(i));
  }
  for (const auto& [idx, name] : sidecar.entries()) {
    auto [it, inserted] = by_name_.emplace(name, idx);
    if (!inserted && it->second != idx) {
      throw Error(ErrorCode::InvalidArgument,
                  "class '" + name + "' has index " + std::to_string(idx) +
                      " in the class table but " + std::to_string(it->second) + " in the model");
    }
  }
}

int ClassResolver::resolve(std::string_view name) const {
  if (auto it = by_name_.find(name); it != by_name_.end()) return it->second;
  int idx = -1;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (!name.empty() && ec == std::errc{} && ptr == name.data() + name.size() && idx >= 0 &&
      idx < n_classes_) {
    return idx;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown class '" + std::string(name) + "'");
}

AlphaSpec parse_alpha(std::string_view text, const ClassResolver& classes) {
  AlphaSpec spec;
  for (auto part : split(text, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      if (spec.global) throw Error(ErrorCode::InvalidArgument, "--alpha: two global values");
      spec.global = parse_number(part, "--alpha");
      continue;
    }
    const int cls = classes.resolve(trim(part.substr(0, eq)));
    if (!spec.per_class.emplace(cls, parse_number(part.substr(eq + 1), "--alpha")).second) {
      throw Error(ErrorCode::InvalidArgument,
                  "--alpha: class '" + std::string(trim(part.substr(0, eq))) + "' given twice");
    }
  }
  auto check = [](double a) {
    if (a < 0.0 || a > 1.0) {
      throw Error(ErrorCode::InvalidAlpha, "alpha must lie in [0, 1], got " + std::to_string(a));
    }
  };
  if (spec.global) check(*spec.global);
  for (const auto& [cls, a] : spec.per_class) check(a);
  return spec;
}

StyleMix parse_weights(std::string_view text, int n_styles) {
  text = trim(text);
  if (text == "by-count") return StyleMix::by_count();
  if (text == "uniform") return StyleMix::uniform();
  const auto parts = split(text, ',');
  if (static_cast<int>(parts.size()) != n_styles) {
    throw Error(ErrorCode::ShapeMismatch, "--weights has " + std::to_string(parts.size()) +
                                              " entries but the model has " +
                                              std::to_string(n_styles) + " styles");
  }
  std::vector<double> w;
  for (auto p : parts) w.push_back(parse_number(p, "--weights"));
  return StyleMix::explicit_weights(StyleWeights::normalized(std::move(w)));
}

std::vector<int> parse_class_list(std::string_view text, const ClassResolver& classes) {
  std::vector<int> out;
  for (auto part : split(text, ',')) {
    if (!part.empty()) out.push_back(classes.resolve(part));
  }
  return out;
}

}  // namespace gwct::cli
