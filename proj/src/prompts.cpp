#include "legalstyle/prompts.hpp"

#include <mutex>

#include <nlohmann/json.hpp>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/hashing.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) throw Error(ErrorCode::Config, "unterminated placeholder in prompt template");
    out.append(tmpl.substr(pos, open - pos));
    const std::string name = utf8::trim(tmpl.substr(open + 2, close - open - 2));
    const auto it = vars.find(name);
    if (it == vars.end()) throw Error(ErrorCode::Config, "no value for prompt placeholder {{" + name + "}}");
    out += it->second;
    pos = close + 2;
  }
  return out;
}

PromptSet PromptSet::load(const std::filesystem::path& path) {
  PromptSet set;
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    set.version_ = j.at("version").get<std::string>();
    for (const auto& [name, t] : j.at("templates").items()) {
      set.templates_.emplace(name, PromptTemplate{t.at("system").get<std::string>(), t.at("user").get<std::string>()});
    }
    for (const auto& [name, text] : j.at("emphasis").items()) set.emphasis_.emplace(name, text.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, path.string() + ": malformed prompt file: " + e.what());
  }
  if (set.version_.empty()) throw Error(ErrorCode::Format, path.string() + ": prompt file has no version");
  return set;
}

std::shared_ptr<const PromptSet> PromptSet::shipped() {
  static std::once_flag once;
  static std::shared_ptr<const PromptSet> instance;
  std::call_once(once, [] {
    instance = std::make_shared<const PromptSet>(load(default_data_dir() / "prompts" / "prompts.json"));
  });
  return instance;
}

const PromptTemplate& PromptSet::get(std::string_view name) const {
  const auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(ErrorCode::Config, "unknown prompt template '" + std::string(name) + "'");
  return it->second;
}

std::string PromptSet::template_sha(std::string_view name) const {
  const auto& t = get(name);
  return sha256_hex(t.system + "\x1f" + t.user).substr(0, 16);
}

const std::string& PromptSet::emphasis_instruction(std::string_view emphasis) const {
  const auto it = emphasis_.find(emphasis);
  if (it == emphasis_.end()) throw Error(ErrorCode::InvalidEmphasis, "unknown emphasis '" + std::string(emphasis) + "'");
  return it->second;
}

RenderedPrompt PromptSet::render(std::string_view name, const std::map<std::string, std::string>& vars) const {
  const auto& t = get(name);
  return RenderedPrompt{render_template(t.system, vars), render_template(t.user, vars)};
}

}  // namespace legalstyle
