#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fieldsym::cli {

/// Entry point behind the command-line binary. Returns the process exit
/// code: 0 when every requested verdict passes, 1 when the analysis finds
/// violations, 2 on usage or parse errors. Reports go to `out`, diagnostics
/// to `err`. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

constexpr const char* kToolVersion = "0.1.0";

}  // namespace fieldsym::cli
