#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lmlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;

/// Parses `args` (without the program name), runs the subcommand and writes its
/// artifacts plus manifest.json into --out. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lmlab::cli
