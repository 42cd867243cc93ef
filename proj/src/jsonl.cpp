#include "legalstyle/jsonl.hpp"

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

void for_each_jsonl(const std::filesystem::path& path, const std::function<void(const nlohmann::json&)>& fn) {
  const auto content = read_file(path);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    const std::string_view line(content.data() + pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (utf8::is_blank(line)) continue;
    try {
      fn(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace legalstyle
