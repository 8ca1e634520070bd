#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bargain/remote.hpp"

namespace bargain::cli {

/// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  /// Aborted runs, replay divergence, accuracy under threshold.
  kFailure = 1,
  /// Bad arguments, config, or unreadable input.
  kUsage = 2,
};

struct CliContext {
  std::ostream& out;
  std::ostream& err;
  /// Replaces the HTTP client when set (tests point this at counters/stubs).
  Transport* transport = nullptr;
  /// Replaces the system clock used for backoff and rate limiting.
  Clock* clock = nullptr;
};

/// Entry point behind `main`; args exclude the program name.
int run_cli(const std::vector<std::string>& args, CliContext& ctx);

}  // namespace bargain::cli
