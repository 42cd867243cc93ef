#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

namespace legalstyle {

struct PromptTemplate {
  std::string system;
  std::string user;
};

struct RenderedPrompt {
  std::string system;
  std::string user;
};

/// Replaces every `{{name}}` with vars[name]. Substituted values are not
/// rescanned. Throws Error(Config) for a placeholder without a value.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Versioned prompt templates and emphasis instructions loaded from JSON.
class PromptSet {
 public:
  static PromptSet load(const std::filesystem::path& path);
  static std::shared_ptr<const PromptSet> shipped();

  [[nodiscard]] const std::string& version() const noexcept { return version_; }
  /// Throws Error(Config) for an unknown template name.
  [[nodiscard]] const PromptTemplate& get(std::string_view name) const;
  /// Short SHA-256 of the template's system and user text.
  [[nodiscard]] std::string template_sha(std::string_view name) const;
  /// Throws Error(InvalidEmphasis) for an unknown tag.
  [[nodiscard]] const std::string& emphasis_instruction(std::string_view emphasis) const;
  [[nodiscard]] RenderedPrompt render(std::string_view name, const std::map<std::string, std::string>& vars) const;

 private:
  std::string version_;
  std::map<std::string, PromptTemplate, std::less<>> templates_;
  std::map<std::string, std::string, std::less<>> emphasis_;
};

}  // namespace legalstyle
