#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pulsehom::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;

// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pulsehom::cli
