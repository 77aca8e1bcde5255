#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace woundbench {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes: 0 success, 2 input or usage error, 3 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

} // namespace woundbench
