#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twistorq::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kRankDeficient = 2;
inline constexpr int kNumericalBreakdown = 3;
inline constexpr int kParseError = 4;
inline constexpr int kOtherError = 5;

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace twistorq::cli
