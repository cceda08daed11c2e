#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drfuse {

/// Runs one `drfuse` invocation (args excludes the program name) and returns
/// the process exit code: 0 success, 1 usage/config, 2 data, 3 internal.
/// Diagnostics go to `err` as a single line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drfuse
