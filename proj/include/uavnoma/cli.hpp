#pragma once

#include <iosfwd>

namespace uavnoma {

// Subcommands run, sweep and verify. Returns 0 on success, 1 on a failed
// run or verification, 2 on a usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uavnoma
