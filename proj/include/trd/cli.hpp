#pragma once

#include <string>
#include <vector>

namespace trd::cli {

/// Runs one command line. Exit status: 0 success, 1 usage error, 2 data
/// error, 3 numeric failure.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

} // namespace trd::cli
