#pragma once

#include <ostream>
#include <span>
#include <string>

namespace swctrl::cli {

/// Runs one invocation; args excludes the program name.
/// Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace swctrl::cli
