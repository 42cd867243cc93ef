#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace legalstyle {

/// System and human scores aligned by document id.
struct PairedScores {
  std::vector<std::string> ids;
  std::vector<double> system;
  std::vector<double> human;
};

/// Throws Error(Alignment) when either side has ids the other lacks or
/// fewer than two documents remain.
PairedScores align_scores(const std::map<std::string, double>& system, const std::map<std::string, double>& human);

/// Product-moment correlation. Throws Error(UndefinedCorrelation) for a
/// constant series and Error(Alignment) for mismatched lengths or n < 2.
double pearson(std::span<const double> x, std::span<const double> y);
/// 1-based ranks with ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);
/// Tau-b in O(n log n).
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// Raters x units; empty cells are missing ratings.
struct AnnotationMatrix {
  std::vector<std::vector<std::optional<double>>> ratings;
};

/// Interval-metric Krippendorff's alpha. Units with fewer than two ratings
/// are ignored. Throws Error(UndefinedAgreement) when no unit is pairable or
/// every pairable value is identical.
double krippendorff_alpha_interval(const AnnotationMatrix& m);

struct Dispersion {
  double stddev = 0.0;
  double variance = 0.0;
  double cv = 0.0;
};

/// Population statistics; variance is exactly stddev². Throws
/// Error(InsufficientData) for n < 2 and Error(UndefinedCV) for mean 0.
Dispersion dispersion(std::span<const double> scores);

/// Character-level F1 over non-whitespace code points with multiset
/// overlap. Throws Error(EmptyText) for blank input.
double char_f1(std::string_view prediction, std::string_view reference);

}  // namespace legalstyle
