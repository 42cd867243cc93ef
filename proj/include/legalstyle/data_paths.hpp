#pragma once

#include <filesystem>
#include <string>

namespace legalstyle {

/// Root of the shipped data files. `LEGALSTYLE_DATA_DIR` in the environment
/// overrides the build-time default.
std::filesystem::path default_data_dir();

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace legalstyle
