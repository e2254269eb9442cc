#pragma once

#include <string>
#include <vector>

namespace streamrec::cli {

// Full command-line surface behind main(). Returns the process exit code;
// diagnostics go to stderr. The vector form (program name excluded) exists
// so tests can drive the tool in-process.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace streamrec::cli
