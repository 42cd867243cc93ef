#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace legalstyle {

/// One segment of the source. Offsets count Unicode code points.
struct Token {
  std::string word;
  std::string tag;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

struct TokenizedText {
  std::vector<Token> tokens;

  bool operator==(const TokenizedText&) const = default;
};

/// Word-frequency dictionary with part-of-speech tags, in the jieba text
/// format (`word freq tag` per line). Immutable once loaded.
class Dictionary {
 public:
  static std::shared_ptr<const Dictionary> load(const std::filesystem::path& dict_path,
                                                const std::filesystem::path& tagset_path);

  /// Loads the shipped dictionary once per process and returns the shared instance.
  static std::shared_ptr<const Dictionary> shipped();

  /// Frequency of `word`; zero for pure prefixes, nullopt when unknown.
  [[nodiscard]] std::optional<std::int64_t> frequency(std::u32string_view word) const;
  [[nodiscard]] std::string_view tag(std::u32string_view word) const;
  [[nodiscard]] bool known_tag(std::string_view tag) const { return tagset_.contains(std::string(tag)); }
  [[nodiscard]] double log_total() const noexcept { return log_total_; }
  [[nodiscard]] const std::string& tagset_version() const noexcept { return tagset_version_; }

  /// 1-based rank of a Han character by its frequency-weighted occurrence
  /// across dictionary words; nullopt for characters absent from the dictionary.
  [[nodiscard]] std::optional<std::uint32_t> char_rank(char32_t cp) const;
  [[nodiscard]] std::size_t ranked_chars() const noexcept { return char_rank_.size(); }

 private:
  struct Entry {
    std::int64_t freq = 0;
    std::string tag;
  };

  std::unordered_map<std::u32string, Entry> entries_;
  std::unordered_map<char32_t, std::uint32_t> char_rank_;
  std::unordered_set<std::string> tagset_;
  std::string tagset_version_;
  double log_total_ = 0.0;
};

/// Dictionary-driven maximum-probability segmentation with POS tags. Pure:
/// identical input always yields identical output.
class Segmenter {
 public:
  explicit Segmenter(std::shared_ptr<const Dictionary> dictionary);

  /// Shared segmenter over the shipped dictionary.
  static std::shared_ptr<const Segmenter> shipped();

  [[nodiscard]] TokenizedText segment(std::string_view text) const;
  [[nodiscard]] const Dictionary& dictionary() const noexcept { return *dictionary_; }

 private:
  void cut_block(std::u32string_view block, std::size_t offset, std::vector<Token>& out) const;

  std::shared_ptr<const Dictionary> dictionary_;
};

}  // namespace legalstyle
