#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "legalstyle/experience.hpp"

namespace legalstyle {

/// Exact cosine-similarity index over negative exemplar embeddings. Stored
/// vectors are unit-normalized once at build time. Immutable after build.
class VectorIndex {
 public:
  /// Throws Error(IndexBuild) for empty pools or mixed dimensions.
  static VectorIndex build(const ExperiencePools& pools);
  /// Entries are (pair id, embedding). Throws Error(IndexBuild) for an empty
  /// list or mixed dimensions and Error(ZeroVector) for a zero embedding.
  static VectorIndex build(const std::vector<std::pair<std::size_t, std::vector<double>>>& entries);

  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
  [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }

  /// The y ids most similar to `query`, by descending cosine and then
  /// ascending id. Returns every id when y exceeds the index size. Throws
  /// Error(ZeroVector) for a zero query and Error(IndexBuild) for a
  /// dimension mismatch.
  [[nodiscard]] std::vector<std::size_t> top_similar(std::span<const double> query, std::size_t y) const;

  bool operator==(const VectorIndex&) const = default;

 private:
  std::vector<std::size_t> ids_;
  std::vector<double> unit_;  // size() x dim_, row-major
  std::size_t dim_ = 0;
};

/// Full pairs for the given ids, in the given order. Throws
/// Error(MissingPair) for an unknown id.
std::vector<ExemplarPair> with_positives(const ExperiencePools& pools, std::span<const std::size_t> ids);

}  // namespace legalstyle
