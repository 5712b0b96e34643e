#pragma once

namespace magloop::cli {

  enum ExitCode : int {
    ok = 0,
    failure = 1,
    config_error = 2,
    inconclusive = 3,
    no_negative_loop = 4,
  };

  /// Entry point of the `magloop` executable; returns the process exit code.
  int run_cli(int argc, char** argv);

}  // namespace magloop::cli
