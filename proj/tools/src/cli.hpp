#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kss::cli {

enum ExitCode : int {
  kOk = 0,
  kConfig = 1,       // malformed config or command line
  kDomain = 2,       // numerical-domain error
  kDiagnostics = 3,  // saturation, degeneracy or resolution failure
};

/// Runs one subcommand; `args` excludes the program name. Reports go to
/// `--out <dir>` (report.json plus a CSV table) or, without --out, as JSON
/// on `out`. Errors are written to `err`.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace kss::cli
