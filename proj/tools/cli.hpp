#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace polarpref::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Bad arguments or configuration (exit 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be used (exit 1).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`, diagnostics to `err`; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polarpref::cli
