#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cogdyn {

std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it into place, so readers
// never observe a partially written artifact.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string content_hash(std::string_view bytes);

}  // namespace cogdyn
