#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace levsense {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file, then renames over `path`.
void atomic_write(const std::filesystem::path& path, std::string_view contents);

/// Ordered key/value provenance chain; keys like "config_sha256", "input.trace_sha256".
using Provenance = std::map<std::string, std::string>;

Provenance base_provenance(std::string_view config_hash);

}  // namespace levsense
