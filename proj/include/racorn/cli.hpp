#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace racorn::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;  // data or runtime failure
inline constexpr int kUsage = 2;    // bad flags or config

/// Entry point for `racorn <backtest|validate|sweep> ...`. `args` excludes
/// the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace racorn::cli
