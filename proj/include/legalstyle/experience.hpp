#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "legalstyle/dimensions.hpp"
#include "legalstyle/features.hpp"
#include "legalstyle/gateway.hpp"
#include "legalstyle/prompts.hpp"
#include "legalstyle/regression.hpp"
#include "legalstyle/synthesis.hpp"

namespace legalstyle {

struct StyleIssue {
  Dimension dimension = Dimension::Noun;
  std::string description;
  std::string gold_span;
  std::string restored_span;

  bool operator==(const StyleIssue&) const = default;
};

/// Positive (gold-side) and negative (restored-side) snippets addressing the
/// same issue. The pair id is the position in both pools.
struct ExemplarPair {
  std::size_t pair_id = 0;
  std::string positive;
  std::string negative;
  StyleIssue issue;
  EmbeddingVector positive_embedding;
  EmbeddingVector negative_embedding;
  std::string source_doc_id;

  bool operator==(const ExemplarPair&) const = default;
};

struct PoolMetadata {
  std::string prompt_version;
  std::string identify_model;
  std::string embedder_id;
  bool backend_deterministic = true;

  bool operator==(const PoolMetadata&) const = default;
};

/// Index-aligned positive and negative pools. Pair ids are 0..M-1 and every
/// id has exactly one positive and one negative.
class ExperiencePools {
 public:
  ExperiencePools() = default;
  explicit ExperiencePools(PoolMetadata metadata) : metadata_(std::move(metadata)) {}

  /// Appends a pair, assigning the next id. Returns nullopt without
  /// changing the pools when an identical (positive, negative) pair exists.
  std::optional<std::size_t> add(ExemplarPair pair);

  [[nodiscard]] std::size_t size() const noexcept { return pairs_.size(); }
  [[nodiscard]] bool empty() const noexcept { return pairs_.empty(); }
  [[nodiscard]] const std::vector<ExemplarPair>& pairs() const noexcept { return pairs_; }
  /// Throws Error(MissingPair) for an unknown id.
  [[nodiscard]] const ExemplarPair& pair(std::size_t id) const;
  /// Θ lookup from a negative exemplar's id to its positive text.
  [[nodiscard]] const std::string& positive_for(std::size_t negative_id) const { return pair(negative_id).positive; }
  [[nodiscard]] const PoolMetadata& metadata() const noexcept { return metadata_; }
  [[nodiscard]] std::size_t embedding_dim() const noexcept;

  [[nodiscard]] std::string positives_jsonl() const;
  [[nodiscard]] std::string negatives_jsonl() const;
  /// SHA-256 over both serialized pools; identifies pool contents.
  [[nodiscard]] std::string fingerprint() const;

  bool operator==(const ExperiencePools&) const = default;

 private:
  PoolMetadata metadata_;
  std::vector<ExemplarPair> pairs_;
  std::set<std::pair<std::string, std::string>> seen_;
};

/// Pool directory layout: positives.jsonl, negatives.jsonl, manifest.json.
void save_pools(const ExperiencePools& pools, const std::filesystem::path& dir, const nlohmann::json& extra = {});
/// Verifies counts and checksums recorded in the manifest.
ExperiencePools load_pools(const std::filesystem::path& dir);

struct LearnOptions {
  std::size_t workers = 4;
  /// Pairs handled between progress checkpoints in a directory build.
  std::size_t checkpoint_every = 16;
  /// Stop (without finalizing) after this many pairs have been processed;
  /// used to exercise resumption.
  std::optional<std::size_t> stop_after;
};

struct LearnSummary {
  std::size_t pairs_processed = 0;
  std::size_t pairs_skipped = 0;
  std::size_t issues_dropped = 0;
  std::size_t duplicates = 0;
  bool finalized = false;
  bool resumed = false;
};

/// Issue identification, exemplar extraction and pool accumulation.
class ExperienceLearner {
 public:
  ExperienceLearner(Gateway& gateway, std::shared_ptr<const PromptSet> prompts, LearnOptions options = {});

  /// Issues whose spans are not verbatim substrings of their texts are
  /// dropped. Throws Error(IdentifyParse) when the reply and one repair
  /// attempt are both unparseable.
  [[nodiscard]] std::vector<StyleIssue> identify_issues(const ContrastivePair& pair,
                                                        std::size_t* dropped = nullptr) const;
  /// Span projection: positive = gold span, negative = restored span.
  /// The pair id is assigned when the pair enters a pool.
  [[nodiscard]] ExemplarPair extract_exemplars(const StyleIssue& issue, const std::string& doc_id = {}) const;

  /// In-memory build. Pairs that fail are skipped. Throws Error(EmptyPools)
  /// when nothing is extracted.
  [[nodiscard]] ExperiencePools build_pools(std::span<const ContrastivePair> pairs,
                                            LearnSummary* summary = nullptr) const;
  /// Build that appends to part files under `dir` and resumes from its
  /// progress record. Finalizing compacts the part files into the pool
  /// layout read by load_pools.
  LearnSummary build_pools_in(std::span<const ContrastivePair> pairs, const std::filesystem::path& dir) const;

  [[nodiscard]] PoolMetadata metadata() const;

 private:
  struct PairOutcome {
    std::vector<ExemplarPair> exemplars;
    std::size_t dropped = 0;
    std::optional<std::string> failure;
  };
  PairOutcome process(const ContrastivePair& pair) const;

  Gateway& gateway_;
  std::shared_ptr<const PromptSet> prompts_;
  LearnOptions options_;
};

/// Parses an identify reply; returns nullopt when it is not the expected JSON.
std::optional<std::vector<nlohmann::json>> parse_issue_list(std::string_view reply);

/// Extracts features for every exemplar, fits normalization on the union,
/// trains with positives labeled 1 and negatives 0 and keeps the top k.
RegressionModel train_from_pools(const ExperiencePools& pools, const FeatureExtractor& extractor, double lambda,
                                 std::size_t k, const TrainOptions& options = {}, std::size_t workers = 1);

}  // namespace legalstyle
