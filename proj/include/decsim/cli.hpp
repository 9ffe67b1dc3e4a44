#pragma once

#include <string>
#include <vector>

namespace decsim::cli {

// Exit codes: 0 success, 2 config error, 3 runtime diagnostic.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace decsim::cli
