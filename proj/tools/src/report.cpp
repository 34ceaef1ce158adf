#include "report.hpp"

#include <json.hpp>

#include "gwct/error.hpp"

namespace gwct::cli {

namespace {

std::string class_name(const StyleModel& model, int cls) {
  if (cls >= 0 && cls < static_cast<int>(model.class_names.size())) {
    return model.class_names[static_cast<std::size_t>(cls)];
  }
  return {};
}

}  // namespace

void ReportWriter::frame(const FrameResult& result, const std::string& input,
                         const StyleModel& model) {
  if (out_ == nullptr) return;
  using nlohmann::json;
  for (const auto& level : result.report.levels) {
    json cells = json::object();
    for (const auto& [cls, n] : level.class_cells) cells[std::to_string(cls)] = n;
    json warnings = json::array();
    for (const auto& w : level.warnings) {
      json entry = {{"class", w.cls}, {"message", w.message}};
      if (auto name = class_name(model, w.cls); !name.empty()) entry["name"] = name;
      warnings.push_back(std::move(entry));
    }
    *out_ << json{{"type", "level"},
                  {"frame", result.index},
                  {"input", input},
                  {"level", level.level},
                  {"ms", level.milliseconds},
                  {"class_cells", std::move(cells)},
                  {"clamped_eigenvalues", level.clamped_eigenvalues},
                  {"warnings", std::move(warnings)}}
                 .dump()
          << '\n';
  }
  json line = {{"type", "frame"},
               {"frame", result.index},
               {"input", input},
               {"status", result.image ? "ok" : "error"},
               {"ms", result.milliseconds},
               {"levels", result.report.levels.size()},
               {"warnings", result.report.warning_count()}};
  if (result.error_code) {
    line["error"] = {{"code", to_string(*result.error_code)}, {"message", result.error}};
  }
  *out_ << line.dump() << '\n';
  out_->flush();
}

void ReportWriter::summary(const SequenceSummary& summary, double milliseconds) {
  if (out_ == nullptr) return;
  *out_ << nlohmann::json{{"type", "summary"},
                          {"frames", summary.frames},
                          {"failed", summary.failed},
                          {"ms", milliseconds}}
               .dump()
        << '\n';
  out_->flush();
}

}  // namespace gwct::cli
