#pragma once

#include <iosfwd>

namespace ctbot::cli {

/// Exit codes: 0 success, 1 domain failure (non-convergence, bad config,
/// I/O), 2 usage or parse error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctbot::cli
