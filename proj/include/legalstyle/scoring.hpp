#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "legalstyle/dimensions.hpp"
#include "legalstyle/experience.hpp"
#include "legalstyle/features.hpp"
#include "legalstyle/gateway.hpp"
#include "legalstyle/prompts.hpp"
#include "legalstyle/regression.hpp"
#include "legalstyle/retrieval.hpp"

namespace legalstyle {

struct FusionWeights {
  double objective = 0.5;
  double subjective = 0.5;
};

/// Ψ' = w_obj·obj + w_subj·subj, mapped through 1/(1+exp(-10(Ψ'/10 - 0.5))).
/// Throws Error(InvalidScore) for inputs outside [0, 10].
double fuse(double objective, double subjective, const FusionWeights& weights = {});
/// The pre-sigmoid combination Ψ'.
double fuse_linear(double objective, double subjective, const FusionWeights& weights = {});

/// 10·σ(Σ_{i∈selected} w_i·z_i) over the normalized raw features; the bias
/// is not used. Throws Error(CatalogMismatch) on catalog disagreement.
double score_objective(const FeatureVector& raw, const RegressionModel& model);
double score_objective(std::string_view text, const RegressionModel& model, const FeatureExtractor& extractor);

/// Σ_d weight_d · score_d.
double score_subjective(const std::array<double, 7>& dimension_scores, const DimensionWeights& weights);

struct DimensionScore {
  Dimension dimension = Dimension::Noun;
  double score = 0.0;
  /// Judge value before clamping to [0, 10].
  double judge_score = 0.0;
  std::string analysis;
  std::vector<std::string> queries;
  std::vector<std::size_t> retrieved_ids;
  std::string feedback;
};

struct ScoreReport {
  std::string id;
  double objective = 0.0;
  std::vector<DimensionScore> dimensions;
  double subjective = 0.0;
  double fused_linear = 0.0;
  double fused = 0.0;
  nlohmann::json provenance;
};

nlohmann::json to_json(const ScoreReport& report, const DimensionWeights& weights);
/// Plain-text rendering with the feedback for every dimension.
std::string render_summary(const ScoreReport& report);

/// Parses the judge's final `SCORE:` line; nullopt when absent.
std::optional<double> parse_judge_score(std::string_view reply);
std::string parse_judge_feedback(std::string_view reply);

struct ScoringOptions {
  std::size_t queries = 10;
  std::size_t retrievals = 10;
  DimensionWeights weights = DimensionWeights::defaults();
  FusionWeights fusion;
  std::size_t workers = 1;
};

/// Objective, retrieval-guided subjective and fused scoring of a single
/// text. Never consults a reference text.
class Scorer {
 public:
  Scorer(Gateway& gateway, std::shared_ptr<const PromptSet> prompts, const RegressionModel& model,
         const ExperiencePools& pools, const VectorIndex& index, const FeatureExtractor& extractor,
         ScoringOptions options = {});

  /// Throws Error(JudgeParse) when neither the reply nor one repair attempt
  /// carries a score.
  [[nodiscard]] DimensionScore score_dimension(std::string_view text, Dimension d) const;
  /// Throws Error(EmptyText) for blank input and Error(VersionMismatch) when
  /// the model, pools and backend disagree.
  [[nodiscard]] ScoreReport score_document(std::string id, std::string_view text) const;

 private:
  std::vector<std::string> generate_queries(std::string_view text, Dimension d, const std::string& analysis) const;
  std::string judge_call(const std::string& task, const std::map<std::string, std::string>& vars,
                         const std::map<std::string, std::string>& payload) const;
  void check_versions() const;

  Gateway& gateway_;
  std::shared_ptr<const PromptSet> prompts_;
  const RegressionModel& model_;
  const ExperiencePools& pools_;
  const VectorIndex& index_;
  const FeatureExtractor& extractor_;
  ScoringOptions options_;
  std::string pools_fingerprint_;
};

}  // namespace legalstyle
