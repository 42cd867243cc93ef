#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "legalstyle/gateway.hpp"

namespace legalstyle {

struct StyleSubstitution {
  std::string formal;
  std::string colloquial;
  std::vector<std::string> restored;
};

struct MockOptions {
  std::vector<StyleSubstitution> style_map;
  std::size_t embedding_dim = 64;
  std::size_t issues_per_pair = 2;
  double judge_score = 7.0;
  /// Probability that a "formality" variant restores the formal phrase.
  double formal_restore_rate = 0.5;

  /// Loads the substitution table shipped under data/mock.
  static MockOptions shipped();
  static MockOptions from_file(const std::filesystem::path& style_map);
};

/// Offline stand-in for chat and embedding endpoints. Every reply is a pure
/// function of (request, seed):
///  - degrade / restore / variant rewrite the payload text with the
///    substitution table;
///  - identify compares gold and restored sentence by sentence and reports up
///    to `issues_per_pair` differing sentence pairs;
///  - analyze / queries / judge return canned, schema-valid replies;
///  - embeddings hash character unigrams and bigrams into a unit vector.
class MockBackend final : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed, MockOptions options = MockOptions::shipped());

  std::string complete(const ChatRequest& request) override;
  std::vector<double> embed(std::string_view text) override;
  [[nodiscard]] std::string embedder_id() const override;
  [[nodiscard]] std::string model_for(ModelRole role) const override;
  [[nodiscard]] bool deterministic() const override { return true; }

  /// Rewrites every formal phrase to its colloquial form (longest match first).
  [[nodiscard]] std::string colloquialize(std::string_view text) const;

 private:
  std::string restore(std::string_view text, std::string_view salt, double formal_rate) const;
  std::string identify(const ChatRequest& request) const;
  std::string queries(const ChatRequest& request) const;
  std::string judge(const ChatRequest& request) const;
  std::string analyze(const ChatRequest& request) const;
  [[nodiscard]] std::uint64_t hash(std::string_view a, std::string_view b = {}) const;

  std::uint64_t seed_;
  MockOptions options_;
};

}  // namespace legalstyle
