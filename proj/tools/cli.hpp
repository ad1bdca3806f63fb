#pragma once

#include <ostream>

namespace xlayer::cli {

// Exit codes: 0 ok, 1 domain rejection under --strict, 2 usage or config error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace xlayer::cli
