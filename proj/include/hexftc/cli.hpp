#pragma once

#include <ostream>

namespace hexftc {

/// hexsim entry point. Exit codes: 0 ok, 1 runtime failure, 2 usage or config error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hexftc
