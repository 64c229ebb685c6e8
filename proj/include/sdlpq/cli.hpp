#pragma once

#include <iosfwd>

namespace sdlpq {

/// Entry point behind the `sdlpq` tool. Subcommands: simulate, verify,
/// gen-trace, cost. Returns the process exit status; `verify` returns 0 iff
/// every unmutated behavioral cell is EXACT.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sdlpq
