#pragma once

#include <filesystem>
#include <string>

namespace edgesr {

// Throws FileNotFound when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace edgesr
