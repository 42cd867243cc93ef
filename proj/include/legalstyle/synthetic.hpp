#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "legalstyle/document.hpp"
#include "legalstyle/features.hpp"
#include "legalstyle/ratings.hpp"

namespace legalstyle {

/// Small deterministic generator (SplitMix64) whose output is identical on
/// every platform, unlike the standard distributions.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept;
  /// Uniform in [0, n).
  std::size_t below(std::size_t n) noexcept;
  /// Uniform in [0, 1).
  double uniform() noexcept;
  double normal() noexcept;

 private:
  std::uint64_t state_;
};

/// Seeded first-instance civil judgments (sales, loan, lease and service
/// disputes) with all five conventional sections. Ids are
/// "<prefix>-<seed>-<index>".
std::vector<CorpusRecord> generate_corpus(std::size_t count, std::uint64_t seed, const std::string& prefix = "doc");

struct RatedText {
  std::string id;
  std::string text;
  std::string reference;
};

/// Simulated expert ratings on all seven dimensions. Each text's latent
/// quality grows with the share of the reference's formulaic phrases that
/// it retains; raters add seeded noise and round to integers in [0, 10].
std::vector<HumanRating> simulate_ratings(const std::vector<RatedText>& texts, std::size_t raters,
                                          std::uint64_t seed, const Lexicon& formulaic);

}  // namespace legalstyle
