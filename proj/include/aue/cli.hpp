#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace aue::cli {

// Exit statuses: 0 success, 2 usage, 3 data, 4 numeric/training failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts;
};

// argv excludes the program name: {"split", "--manifest", "m.txt", ...}.
CommandResult run(std::span<const std::string> argv, std::ostream& out, std::ostream& err);

}  // namespace aue::cli
