#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace treeforge::cli {

/// Runs one command-line invocation against the given streams. Results go to
/// `out`; diagnostics, usage errors, and failure messages go to `err`.
/// Returns the process exit code: 0 on success, 1 when an analysis reports
/// findings or a run fails, 2 on usage or I/O errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace treeforge::cli
