#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gdgs::cli {

/// Process exit codes. Each failure family has its own code so scripts can
/// branch without parsing messages.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,          // unknown subcommand, malformed or missing flags
  kInvalidConfig = 3,  // settings that violate a module invariant
  kIo = 4,             // unreadable input or unwritable output
  kParse = 5,          // malformed input document
  kNumerical = 6,      // solver non-convergence or non-finite values
  kCheckFailed = 7,    // gradcheck exceeded its tolerance
  kInternal = 70,
};

/// Runs one subcommand. args excludes the program name. Normal output goes to
/// out; failures print a single "error category=... message=..." line to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gdgs::cli
