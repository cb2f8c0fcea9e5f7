#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace leach {

/// Subcommands cell, tabulate, run, check. Returns 0 on success, 1 on invalid input
/// (bad flags, config or files), 2 on numerical failure or a failed check.
int cli_main(int argc, const char* const* argv);
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Invariant suite behind `check`; one line per check on `out`. Returns the failure count.
int run_checks(std::ostream& out);

}  // namespace leach
