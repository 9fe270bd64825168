// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace rsr::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

/// Parses argv and runs one command. Results go to `out`, diagnostics and
/// help-on-error to `err`; log lines still go to stderr.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rsr::cli
