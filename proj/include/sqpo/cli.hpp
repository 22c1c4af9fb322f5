#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqpo {

/// Runs one command line (without the program name). Returns the exit code:
/// 0 on success, 1 on domain errors, 2 on usage and I/O errors. Errors are
/// reported on `err` as `error[CODE]: message`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Commit timestamp: $SQPO_TIMESTAMP when set, else the current UTC time.
std::string current_timestamp();

}  // namespace sqpo
