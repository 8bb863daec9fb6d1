#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace psymort {

/// SHA-256 digest as a lowercase hex string.
std::string sha256_hex(std::string_view bytes);

/// Digest of a file's raw bytes. Throws IoError if the file cannot be read.
std::string sha256_hex_file(const std::filesystem::path& path);

}  // namespace psymort
