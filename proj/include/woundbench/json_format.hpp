#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>

namespace woundbench {

/// Serializes with sorted keys, two-space indentation, and every floating
/// point value printed with 17 significant digits. Identical documents
/// produce identical bytes.
std::string format_json(const nlohmann::json& doc);

/// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

} // namespace woundbench
