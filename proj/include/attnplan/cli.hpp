#pragma once

#include <string>
#include <vector>

namespace attnplan {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one CLI invocation (arguments without the program name) and returns
/// the process exit code: 0 on success, 1 for configuration parse or
/// validation problems, 2 when a solver fails to converge, 3 when the state
/// enumeration exceeds its cap.
int run_cli(const std::vector<std::string>& args);

} // namespace attnplan
