#pragma once

#include <iosfwd>

namespace pdl {

// Exit codes: 0 ok, 1 verification failure or runtime error, 2 usage error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdl
