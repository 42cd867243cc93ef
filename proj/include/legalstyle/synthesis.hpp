#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "legalstyle/document.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/gateway.hpp"
#include "legalstyle/prompts.hpp"
#include "legalstyle/segmenter.hpp"

namespace legalstyle {

enum class Emphasis { Efficiency, Thoroughness, Structure, Formality, Educational };

inline constexpr std::array<Emphasis, 5> kEmphases = {Emphasis::Efficiency, Emphasis::Thoroughness,
                                                      Emphasis::Structure, Emphasis::Formality,
                                                      Emphasis::Educational};

std::string_view to_string(Emphasis e) noexcept;
/// Throws Error(InvalidEmphasis) for an unknown tag.
Emphasis parse_emphasis(std::string_view tag);

/// Numerals and proper-noun spans that a rewrite must keep: Arabic digit
/// runs, Chinese numeral runs of two or more characters, and runs of
/// consecutive tokens tagged as person, place, organization or other proper
/// names, and anonymized party names such as 张某 or 李某某. Deduplicated, in
/// order of first occurrence.
class EntityExtractor {
 public:
  explicit EntityExtractor(std::shared_ptr<const Segmenter> segmenter);
  [[nodiscard]] std::vector<std::string> extract(std::string_view text) const;

 private:
  std::shared_ptr<const Segmenter> segmenter_;
};

/// Fraction of `entities` found verbatim in `candidate`; 1.0 when there are none.
double entity_overlap(const std::vector<std::string>& entities, std::string_view candidate);

struct ContrastivePair {
  std::string doc_id;
  std::string gold;
  std::string reverse;
  std::string restored;
  nlohmann::json provenance;

  bool operator==(const ContrastivePair&) const = default;
};

struct SkipRecord {
  std::string doc_id;
  std::string error;
  std::string message;

  bool operator==(const SkipRecord&) const = default;
};

struct SynthesisResult {
  std::vector<ContrastivePair> pairs;
  std::vector<SkipRecord> skipped;
};

struct VariantRecord {
  std::string id;
  std::string doc_id;
  std::string emphasis;
  std::string text;
  std::string reference;
  nlohmann::json provenance;
};

struct SynthesisOptions {
  double min_entity_overlap = 0.9;
  int max_attempts = 3;
  std::size_t workers = 4;
};

/// Degradation and restoration through the gateway, with entity
/// preservation checks and bounded regeneration.
class Synthesizer {
 public:
  Synthesizer(Gateway& gateway, std::shared_ptr<const PromptSet> prompts, std::shared_ptr<const Segmenter> segmenter,
              SynthesisOptions options = {});

  /// Throws Error(DegradationRejected) when no attempt keeps enough entities.
  [[nodiscard]] std::string degrade(std::string_view gold) const;
  /// Throws Error(RestorationRejected) likewise.
  [[nodiscard]] std::string restore(std::string_view reverse) const;
  [[nodiscard]] std::string restore_variant(std::string_view reverse, Emphasis emphasis) const;

  [[nodiscard]] ContrastivePair make_pair(const Document& doc) const;
  /// One pair per document among the first n; failed documents are skipped
  /// and logged. Output follows input order. Throws Error(SynthesisFailed)
  /// when n > 0 and no pair succeeds.
  [[nodiscard]] SynthesisResult synthesize_corpus(std::span<const Document> docs, std::size_t n) const;
  /// Degrades the reasoning section once and restores it under every
  /// emphasis.
  [[nodiscard]] std::vector<VariantRecord> generate_test_variants(const Document& doc) const;

  [[nodiscard]] const SynthesisOptions& options() const noexcept { return options_; }

 private:
  struct Attempted {
    std::string text;
    int attempts = 0;
    std::string prompt_sha;
  };
  Attempted rewrite(std::string_view source, ModelRole role, const std::string& task, const std::string& template_name,
                    std::map<std::string, std::string> vars, std::map<std::string, std::string> payload,
                    ErrorCode on_reject) const;
  nlohmann::json base_provenance() const;

  Gateway& gateway_;
  std::shared_ptr<const PromptSet> prompts_;
  EntityExtractor entities_;
  SynthesisOptions options_;
};

std::string pairs_to_jsonl(const std::vector<ContrastivePair>& pairs);
std::vector<ContrastivePair> read_pairs_jsonl(const std::filesystem::path& path);
std::string skips_to_jsonl(const std::vector<SkipRecord>& skips);
std::string variants_to_jsonl(const std::vector<VariantRecord>& variants);
std::vector<VariantRecord> read_variants_jsonl(const std::filesystem::path& path);

}  // namespace legalstyle
