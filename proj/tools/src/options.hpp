#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gwct/label_mask.hpp"
#include "gwct/pipeline.hpp"

namespace gwct::cli {

/// Flat key=value config file. Keys mirror long flag names without "--".
using ConfigMap = std::map<std::string, std::string>;
ConfigMap parse_config(std::string_view text);
ConfigMap load_config(const std::filesystem::path& path);

/// Inserts config entries as flags for every key the command line does not
/// already set, so flags > config file > defaults. args[0] is the subcommand.
std::vector<std::string> merge_config(const std::vector<std::string>& args,
                                      const ConfigMap& config);

/// Maps class names and numeric indices to class ids.
class ClassResolver {
 public:
  ClassResolver(const std::vector<std::string>& model_names, const ClassTable& sidecar,
                int n_classes);
  /// Throws InvalidArgument for names neither table knows.
  int resolve(std::string_view name) const;

 private:
  std::map<std::string, int, std::less<>> by_name_;
  int n_classes_ = 0;
};

struct AlphaSpec {
  std::optional<double> global;
  std::map<int, double> per_class;
};

/// "0.6", "iris=0.8,eyeball=0.5" or a mix such as "0.6,tools=0.3".
AlphaSpec parse_alpha(std::string_view text, const ClassResolver& classes);

/// "by-count", "uniform" or a comma list of n_styles non-negative numbers
/// (normalized to sum 1).
StyleMix parse_weights(std::string_view text, int n_styles);

/// Comma-separated class names or indices.
std::vector<int> parse_class_list(std::string_view text, const ClassResolver& classes);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view s);
double parse_number(std::string_view text, std::string_view what);

}  // namespace gwct::cli
