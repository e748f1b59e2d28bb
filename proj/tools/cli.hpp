#pragma once

#include <ostream>

namespace sccp::cli {

struct Io {
  std::ostream& out;
  std::ostream& err;
};

// Exit codes: 0 ok, 1 syntax error, 2 semantic error, 3 runtime failure,
// 64 usage error.
int run(int argc, const char* const* argv, const Io& io);

}  // namespace sccp::cli
