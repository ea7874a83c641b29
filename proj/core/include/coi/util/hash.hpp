#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace coi {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents. Throws IoError if unreadable.
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and rename, so readers never observe a
/// partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace coi
