#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "legalstyle/segmenter.hpp"

namespace legalstyle {

enum class FeatureCategory { CharacterComplexity, LexicalPos, Syntactic, DiscourseMarker, Collocation };

std::string_view to_string(FeatureCategory category) noexcept;
FeatureCategory parse_feature_category(std::string_view name);

enum class FeatureKind {
  LogCount,
  CharClassRatio,
  FullwidthPunctShare,
  DistinctHanRatio,
  CharTierRatio,
  UnrankedHanRatio,
  CharLogRank,
  MultiCharWordHanShare,
  TypeTokenRatio,
  HapaxRatio,
  MeanWordLength,
  WordLengthRatio,
  PosRatio,
  PosPairRatio,
  SentenceLength,
  ClausesPerSentence,
  ClauseLength,
  SentenceLengthShare,
  PunctDensity,
  LexiconDensity,
  LexiconTypes,
  LexiconCountLog,
  LawCitationDensity,
  FourCharFormulaShare,
};

/// One catalog entry. `params` keeps the declarative form; the remaining
/// fields are its parsed representation.
struct FeatureSpec {
  std::string id;
  FeatureCategory category{};
  std::string description;
  FeatureKind kind{};
  nlohmann::json params;

  std::string unit;
  std::string stat;
  std::string char_class;
  int lo = 0;
  int hi = 0;
  std::unordered_set<std::string> tags;
  std::unordered_set<std::string> tags_denominator;
  std::u32string chars;
  std::vector<std::size_t> lexicons;
};

struct Lexicon {
  std::string name;
  std::unordered_set<std::string> phrases;
  std::size_t max_chars = 0;
};

/// Ordered, versioned list of feature definitions plus the lexicons they
/// reference. Immutable after loading.
class FeatureCatalog {
 public:
  /// Lexicon paths in the file are resolved relative to the catalog file.
  static FeatureCatalog load(const std::filesystem::path& path);
  static std::shared_ptr<const FeatureCatalog> shipped();

  [[nodiscard]] const std::string& version() const noexcept { return version_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] const std::vector<FeatureSpec>& entries() const noexcept { return entries_; }
  [[nodiscard]] const std::vector<Lexicon>& lexicons() const noexcept { return lexicons_; }
  [[nodiscard]] std::optional<std::size_t> index_of(std::string_view id) const;
  [[nodiscard]] std::vector<std::string> ids() const;

 private:
  std::string version_;
  std::vector<FeatureSpec> entries_;
  std::vector<Lexicon> lexicons_;
};

struct FeatureVector {
  std::vector<double> values;
  std::string catalog_version;

  bool operator==(const FeatureVector&) const = default;
};

/// Per-feature mean and population standard deviation.
struct NormalizationParams {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::string catalog_version;

  bool operator==(const NormalizationParams&) const = default;
};

class FeatureExtractor {
 public:
  FeatureExtractor(std::shared_ptr<const FeatureCatalog> catalog, std::shared_ptr<const Segmenter> segmenter);

  [[nodiscard]] FeatureVector extract(std::string_view text) const;
  [[nodiscard]] const FeatureCatalog& catalog() const noexcept { return *catalog_; }
  [[nodiscard]] const Segmenter& segmenter() const noexcept { return *segmenter_; }

 private:
  std::shared_ptr<const FeatureCatalog> catalog_;
  std::shared_ptr<const Segmenter> segmenter_;
};

FeatureVector extract_features(std::string_view text, const FeatureExtractor& extractor);

/// Requires at least two vectors of the same catalog version.
NormalizationParams fit_normalization(std::span<const FeatureVector> vectors);

/// (value - mean) / std per coordinate; zero-variance coordinates map to 0.
FeatureVector normalize(const FeatureVector& v, const NormalizationParams& params);

/// Sentence boundaries used by the catalog: 。！？； plus any closing quotes.
/// Returns code-point ranges covering the text; a text without terminators
/// is a single sentence.
std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::u32string_view text);

nlohmann::json to_json(const NormalizationParams& p);
NormalizationParams normalization_from_json(const nlohmann::json& j);

}  // namespace legalstyle
