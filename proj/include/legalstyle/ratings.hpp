#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "legalstyle/dimensions.hpp"
#include "legalstyle/metrics.hpp"

namespace legalstyle {

/// One row of the human-score CSV (doc_id, rater_id, dimension, score).
struct HumanRating {
  std::string doc_id;
  std::string rater_id;
  Dimension dimension = Dimension::Noun;
  double score = 0.0;

  bool operator==(const HumanRating&) const = default;
};

/// Throws Error(Format) for a missing header, unknown dimension, score
/// outside [0, 10] or a duplicated (doc, rater, dimension) triple.
std::vector<HumanRating> read_ratings_csv(const std::filesystem::path& path);
std::vector<HumanRating> parse_ratings_csv(const std::string& content, const std::string& where = "ratings");
std::string ratings_to_csv(const std::vector<HumanRating>& ratings);

/// Weighted score per (rater, document); only raters who scored all seven
/// dimensions of a document contribute.
std::map<std::string, std::map<std::string, double>> weighted_by_rater(const std::vector<HumanRating>& ratings,
                                                                       const DimensionWeights& weights);
/// Mean weighted score per document across raters.
std::map<std::string, double> weighted_human_scores(const std::vector<HumanRating>& ratings,
                                                    const DimensionWeights& weights);
/// Raters x documents matrix of weighted scores, documents in id order.
AnnotationMatrix annotation_matrix(const std::vector<HumanRating>& ratings, const DimensionWeights& weights);

}  // namespace legalstyle
