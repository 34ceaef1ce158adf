#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gwct::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCompute = 3;

/// Runs one gwct invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gwct::cli
