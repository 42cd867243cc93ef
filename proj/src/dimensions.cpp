#include "legalstyle/dimensions.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "legalstyle/error.hpp"

namespace legalstyle {

std::string_view to_string(Dimension d) noexcept {
  switch (d) {
    case Dimension::Noun: return "noun";
    case Dimension::Verb: return "verb";
    case Dimension::Adjective: return "adjective";
    case Dimension::FunctionWords: return "function_words";
    case Dimension::Coherence: return "coherence";
    case Dimension::Structure: return "structure";
    case Dimension::Collocations: return "collocations";
  }
  return "unknown";
}

std::string_view display_name(Dimension d) noexcept {
  switch (d) {
    case Dimension::Noun: return "名词使用";
    case Dimension::Verb: return "动词使用";
    case Dimension::Adjective: return "形容词使用";
    case Dimension::FunctionWords: return "虚词使用";
    case Dimension::Coherence: return "句子连贯";
    case Dimension::Structure: return "句子结构";
    case Dimension::Collocations: return "词语搭配";
  }
  return "";
}

std::optional<Dimension> parse_dimension(std::string_view name) noexcept {
  for (auto d : kDimensions) {
    if (to_string(d) == name || display_name(d) == name) return d;
  }
  return std::nullopt;
}

DimensionWeights DimensionWeights::defaults() noexcept {
  DimensionWeights w;
  w.bp_ = {3000, 3000, 2000, 500, 500, 500, 500};
  return w;
}

DimensionWeights DimensionWeights::from_basis_points(const std::array<int, 7>& bp) {
  for (int v : bp) {
    if (v < 0) throw Error(ErrorCode::Config, "dimension weights must be non-negative");
  }
  const int sum = std::accumulate(bp.begin(), bp.end(), 0);
  if (sum != 10000) {
    throw Error(ErrorCode::Config, "dimension weights must sum to 1.0 (got " + std::to_string(sum / 10000.0) + ")");
  }
  DimensionWeights w;
  w.bp_ = bp;
  return w;
}

DimensionWeights DimensionWeights::from_decimal(const std::array<double, 7>& w) {
  std::array<int, 7> bp{};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double scaled = w[i] * 10000.0;
    const double rounded = std::round(scaled);
    if (!std::isfinite(scaled) || std::abs(scaled - rounded) > 1e-6) {
      throw Error(ErrorCode::Config, "dimension weights must be multiples of 0.0001");
    }
    bp[i] = static_cast<int>(rounded);
  }
  return from_basis_points(bp);
}

double DimensionWeights::weight(Dimension d) const noexcept { return bp_[static_cast<std::size_t>(d)] / 10000.0; }

double DimensionWeights::total() const noexcept {
  return std::accumulate(bp_.begin(), bp_.end(), 0) / 10000.0;
}

}  // namespace legalstyle
