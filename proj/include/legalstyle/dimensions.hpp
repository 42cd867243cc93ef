#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace legalstyle {

/// The seven stylistic dimensions judged by the subjective scorer.
enum class Dimension { Noun = 0, Verb, Adjective, FunctionWords, Coherence, Structure, Collocations };

inline constexpr std::array<Dimension, 7> kDimensions = {
    Dimension::Noun,      Dimension::Verb,      Dimension::Adjective,    Dimension::FunctionWords,
    Dimension::Coherence, Dimension::Structure, Dimension::Collocations};

std::string_view to_string(Dimension d) noexcept;
/// Chinese name used in prompts.
std::string_view display_name(Dimension d) noexcept;
std::optional<Dimension> parse_dimension(std::string_view name) noexcept;

/// Per-dimension weights held in basis points (1/10000) so that the sum is
/// checked exactly.
class DimensionWeights {
 public:
  /// noun 0.30, verb 0.30, adjective 0.20, function words / coherence /
  /// structure / collocations 0.05 each.
  static DimensionWeights defaults() noexcept;
  /// Throws Error(Config) unless the entries are non-negative and sum to 10000.
  static DimensionWeights from_basis_points(const std::array<int, 7>& bp);
  /// Accepts decimal weights that are exact multiples of 0.0001.
  static DimensionWeights from_decimal(const std::array<double, 7>& w);

  [[nodiscard]] double weight(Dimension d) const noexcept;
  [[nodiscard]] double total() const noexcept;
  [[nodiscard]] const std::array<int, 7>& basis_points() const noexcept { return bp_; }

 private:
  std::array<int, 7> bp_{};
};

}  // namespace legalstyle
