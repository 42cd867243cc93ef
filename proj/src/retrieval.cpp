#include "legalstyle/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "legalstyle/error.hpp"

namespace legalstyle {

VectorIndex VectorIndex::build(const ExperiencePools& pools) {
  if (pools.empty()) throw Error(ErrorCode::IndexBuild, "cannot index empty pools");
  std::vector<std::pair<std::size_t, std::vector<double>>> entries;
  entries.reserve(pools.size());
  for (const auto& p : pools.pairs()) entries.emplace_back(p.pair_id, p.negative_embedding.values);
  return build(entries);
}

VectorIndex VectorIndex::build(const std::vector<std::pair<std::size_t, std::vector<double>>>& entries) {
  if (entries.empty()) throw Error(ErrorCode::IndexBuild, "cannot build an index without entries");
  VectorIndex index;
  index.dim_ = entries.front().second.size();
  if (index.dim_ == 0) throw Error(ErrorCode::IndexBuild, "embeddings have dimension 0");
  index.ids_.reserve(entries.size());
  index.unit_.reserve(entries.size() * index.dim_);
  for (const auto& [id, v] : entries) {
    if (v.size() != index.dim_) {
      throw Error(ErrorCode::IndexBuild, "embedding for pair " + std::to_string(id) + " has dimension " +
                                             std::to_string(v.size()) + ", expected " + std::to_string(index.dim_));
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorCode::ZeroVector, "embedding for pair " + std::to_string(id) + " has no direction");
    }
    index.ids_.push_back(id);
    for (double x : v) index.unit_.push_back(x / norm);
  }
  return index;
}

std::vector<std::size_t> VectorIndex::top_similar(std::span<const double> query, std::size_t y) const {
  if (query.size() != dim_) {
    throw Error(ErrorCode::IndexBuild, "query dimension " + std::to_string(query.size()) + " does not match index " +
                                           std::to_string(dim_));
  }
  if (y == 0) throw Error(ErrorCode::Config, "retrieval count must be at least 1");
  const double qnorm = std::sqrt(std::inner_product(query.begin(), query.end(), query.begin(), 0.0));
  if (!(qnorm > 0.0) || !std::isfinite(qnorm)) throw Error(ErrorCode::ZeroVector, "query embedding has no direction");

  std::vector<std::pair<double, std::size_t>> scored(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const double* row = unit_.data() + i * dim_;
    double dot = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) dot += row[j] * query[j];
    scored[i] = {dot / qnorm, ids_[i]};
  }
  const auto better = [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; };
  const auto take = std::min(y, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
  std::vector<std::size_t> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = scored[i].second;
  return out;
}

std::vector<ExemplarPair> with_positives(const ExperiencePools& pools, std::span<const std::size_t> ids) {
  std::vector<ExemplarPair> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(pools.pair(id));
  return out;
}

}  // namespace legalstyle
