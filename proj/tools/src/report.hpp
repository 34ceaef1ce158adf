#pragma once

#include <ostream>
#include <string>

#include "gwct/pipeline.hpp"

namespace gwct::cli {

/// JSON-lines stylization report, one object per line; see docs/formats.md.
class ReportWriter {
 public:
  explicit ReportWriter(std::ostream* out) : out_(out) {}

  void frame(const FrameResult& result, const std::string& input, const StyleModel& model);
  void summary(const SequenceSummary& summary, double milliseconds);

 private:
  std::ostream* out_;
};

}  // namespace gwct::cli
