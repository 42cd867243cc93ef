#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace legalstyle {

enum class SectionKind { Header = 0, Facts, Reasoning, Judgment, Footer };

inline constexpr std::array<SectionKind, 5> kSectionKinds = {
    SectionKind::Header, SectionKind::Facts, SectionKind::Reasoning, SectionKind::Judgment,
    SectionKind::Footer};

std::string_view to_string(SectionKind kind) noexcept;

/// Half-open byte range into Document::raw_text.
struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  [[nodiscard]] std::size_t size() const noexcept { return end - begin; }
  [[nodiscard]] bool empty() const noexcept { return begin == end; }
  bool operator==(const TextSpan&) const = default;
};

struct Document {
  std::string id;
  std::string raw_text;
  std::array<TextSpan, 5> sections{};

  [[nodiscard]] std::string_view section(SectionKind kind) const {
    const auto& span = sections[static_cast<std::size_t>(kind)];
    return std::string_view(raw_text).substr(span.begin, span.size());
  }
  [[nodiscard]] std::string_view reasoning() const { return section(SectionKind::Reasoning); }
};

/// Marker phrases that open each section after the header. For every section
/// the earliest occurrence of any of its markers after the previous section's
/// start wins. Judgment markers may be rewound to the start of the sentence
/// that contains them ("依照……之规定，判决如下").
struct SectionMarkers {
  std::vector<std::string> facts;
  std::vector<std::string> reasoning;
  std::vector<std::string> judgment;
  std::vector<std::string> footer;
  bool judgment_from_sentence_start = true;

  static SectionMarkers defaults();
  static SectionMarkers from_json(const nlohmann::json& j);
};

/// Splits a first-instance civil judgment into its five conventional
/// sections. Throws Error(SectionSplit) carrying the text when no reasoning
/// marker is present.
Document split_sections(std::string id, std::string doc_text,
                        const SectionMarkers& markers = SectionMarkers::defaults());

/// One corpus line: {"id": ..., "text": ...}.
struct CorpusRecord {
  std::string id;
  std::string text;

  bool operator==(const CorpusRecord&) const = default;
};

/// Reads a JSONL corpus and NFC-normalizes every text.
std::vector<CorpusRecord> read_corpus_jsonl(const std::filesystem::path& path);
std::string corpus_to_jsonl(const std::vector<CorpusRecord>& records);

}  // namespace legalstyle
