#pragma once

#include <iosfwd>

namespace uavedge {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes of the uavedge tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitIo = 3,
  kExitCheckpoint = 4,
  kExitCsv = 5,
};

// Entry point of `uavedge train|eval|compare|plot`. Never throws; failures
// are reported on `err` and mapped to an exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uavedge
