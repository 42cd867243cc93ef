#include <gtest/gtest.h>

#include <random>

#include "legalstyle/error.hpp"
#include "legalstyle/experience.hpp"
#include "legalstyle/retrieval.hpp"
#include "oracles.hpp"

using namespace legalstyle;

namespace {

using Entries = std::vector<std::pair<std::size_t, std::vector<double>>>;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

Entries random_entries(std::mt19937& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> nd;
  Entries out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = nd(rng);
    out.emplace_back(i, v);
  }
  return out;
}

ExperiencePools pools_with(const std::vector<std::vector<double>>& negatives) {
  ExperiencePools pools;
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    ExemplarPair p;
    p.positive = "正" + std::to_string(i);
    p.negative = "负" + std::to_string(i);
    p.positive_embedding = EmbeddingVector{{1.0, 1.0}, "e"};
    p.negative_embedding = EmbeddingVector{negatives[i], "e"};
    (void)pools.add(std::move(p));
  }
  return pools;
}

}  // namespace

TEST(Index, BuildFromPoolsUsesNegatives) {
  const auto pools = pools_with({{1, 0}, {0, 1}, {1, 1}});
  const auto index = VectorIndex::build(pools);
  EXPECT_EQ(index.size(), 3u);
  EXPECT_EQ(index.dimension(), 2u);
  EXPECT_EQ(VectorIndex::build(pools), index);
  EXPECT_EQ(index.top_similar(std::vector<double>{0, 5}, 1), (std::vector<std::size_t>{1}));
}

TEST(Index, BuildErrors) {
  EXPECT_EQ(code_of([] { (void)VectorIndex::build(ExperiencePools{}); }), ErrorCode::IndexBuild);
  EXPECT_EQ(code_of([] { (void)VectorIndex::build(Entries{}); }), ErrorCode::IndexBuild);
  EXPECT_EQ(code_of([] { (void)VectorIndex::build(Entries{{0, {1, 0}}, {1, {1, 0, 0}}}); }), ErrorCode::IndexBuild);
  EXPECT_EQ(code_of([] { (void)VectorIndex::build(Entries{{0, {0, 0}}}); }), ErrorCode::ZeroVector);
}

TEST(Index, QueryErrors) {
  const auto index = VectorIndex::build(Entries{{0, {1, 0}}});
  EXPECT_EQ(code_of([&] { (void)index.top_similar(std::vector<double>{0, 0}, 1); }), ErrorCode::ZeroVector);
  EXPECT_EQ(code_of([&] { (void)index.top_similar(std::vector<double>{1, 0, 0}, 1); }), ErrorCode::IndexBuild);
  EXPECT_EQ(index.top_similar(std::vector<double>{1, 0}, 10), (std::vector<std::size_t>{0}));
}

TEST(Index, StoredVectorRanksFirst) {
  std::mt19937 rng(2);
  const auto entries = random_entries(rng, 40, 16);
  const auto index = VectorIndex::build(entries);
  for (std::size_t i = 0; i < entries.size(); ++i) EXPECT_EQ(index.top_similar(entries[i].second, 1).front(), i);
}

TEST(Index, OnlyNonOrthogonalEntryRanksFirst) {
  const auto index = VectorIndex::build(Entries{{0, {1, 0, 0}}, {1, {0, 1, 0}}, {2, {0, 0, 1}}});
  EXPECT_EQ(index.top_similar(std::vector<double>{0, 0, 2}, 3), (std::vector<std::size_t>{2, 0, 1}));
}

TEST(Index, MatchesBruteForceScan) {
  std::mt19937 rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const auto entries = random_entries(rng, 50, 8);
    const auto index = VectorIndex::build(entries);
    std::normal_distribution<double> nd;
    std::vector<double> q(8);
    for (auto& x : q) x = nd(rng);
    EXPECT_EQ(index.top_similar(q, 10), oracle::brute_force_top(entries, q, 10));
  }
}

TEST(Index, TiesBreakByAscendingId) {
  const auto index = VectorIndex::build(Entries{{0, {0, 1}}, {1, {2, 0}}, {2, {1, 0}}, {3, {3, 0}}});
  EXPECT_EQ(index.top_similar(std::vector<double>{1, 0}, 3), (std::vector<std::size_t>{1, 2, 3}));
}

TEST(Index, QueryScaleDoesNotChangeOrder) {
  std::mt19937 rng(8);
  const auto entries = random_entries(rng, 100, 12);
  const auto index = VectorIndex::build(entries);
  std::vector<double> q(12, 0.3);
  q[3] = -1.0;
  const auto base = index.top_similar(q, 20);
  for (double s : {1e-6, 0.5, 7.0, 1e6}) {
    auto scaled = q;
    for (auto& x : scaled) x *= s;
    EXPECT_EQ(index.top_similar(scaled, 20), base);
  }
}

TEST(WithPositives, OrderAndErrors) {
  const auto pools = pools_with({{1, 0}, {0, 1}, {1, 1}});
  const std::vector<std::size_t> ids = {2, 0};
  const auto got = with_positives(pools, ids);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].positive, "正2");
  EXPECT_EQ(got[1].negative, "负0");
  EXPECT_TRUE(with_positives(pools, std::vector<std::size_t>{}).empty());
  EXPECT_EQ(code_of([&] { (void)with_positives(pools, std::vector<std::size_t>{7}); }), ErrorCode::MissingPair);
}
