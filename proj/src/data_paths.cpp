#include "legalstyle/data_paths.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "legalstyle/error.hpp"

namespace legalstyle {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("LEGALSTYLE_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return LEGALSTYLE_DEFAULT_DATA_DIR;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::Io, "cannot read " + path.string(), path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::Io, "cannot write " + path.string(), path.string());
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) {
      throw Error(ErrorCode::Io, "short write to " + path.string(), path.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace legalstyle
