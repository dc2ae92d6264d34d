#pragma once

#include <iosfwd>

namespace geobound {

/// Command-line entry point. Exit codes: 0 success, 1 input or resource
/// error, 2 flag misuse.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace geobound
