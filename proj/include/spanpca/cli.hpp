#pragma once

#include <ostream>

namespace spanpca {

/// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spanpca
