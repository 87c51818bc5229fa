#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace incat::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

// Runs one `incat` command. args excludes the program name. Machine-readable
// JSON goes to `out`, human-readable tables and diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

} // namespace incat::cli
