#include <gtest/gtest.h>

#include <fstream>

#include "legalstyle/config.hpp"
#include "legalstyle/dimensions.hpp"
#include "legalstyle/error.hpp"
#include "support.hpp"

using namespace legalstyle;
using legalstyle::test_support::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(DimensionWeights, Defaults) {
  const auto w = DimensionWeights::defaults();
  EXPECT_EQ(w.total(), 1.0);
  EXPECT_EQ(w.basis_points(), (std::array<int, 7>{3000, 3000, 2000, 500, 500, 500, 500}));
  EXPECT_DOUBLE_EQ(w.weight(Dimension::Noun), 0.30);
  EXPECT_DOUBLE_EQ(w.weight(Dimension::Adjective), 0.20);
  EXPECT_DOUBLE_EQ(w.weight(Dimension::Collocations), 0.05);
}

TEST(DimensionWeights, Validation) {
  EXPECT_EQ(code_of([] { (void)DimensionWeights::from_basis_points({3000, 3000, 2000, 500, 500, 500, 400}); }),
            ErrorCode::Config);
  EXPECT_EQ(code_of([] { (void)DimensionWeights::from_basis_points({-500, 3500, 2000, 500, 500, 500, 500}); }),
            ErrorCode::Config);
  EXPECT_EQ(code_of([] { (void)DimensionWeights::from_decimal({0.3, 0.3, 0.2, 0.05, 0.05, 0.05, 0.04}); }),
            ErrorCode::Config);
  EXPECT_EQ(code_of([] { (void)DimensionWeights::from_decimal({0.30005, 0.29995, 0.2, 0.05, 0.05, 0.05, 0.05}); }),
            ErrorCode::Config);
  EXPECT_EQ(DimensionWeights::from_decimal({0.3, 0.3, 0.2, 0.05, 0.05, 0.05, 0.05}).basis_points(),
            DimensionWeights::defaults().basis_points());
}

TEST(DimensionNames, RoundTrip) {
  for (auto d : kDimensions) {
    EXPECT_EQ(parse_dimension(to_string(d)), d);
    EXPECT_FALSE(display_name(d).empty());
  }
  EXPECT_FALSE(parse_dimension("tone").has_value());
}

TEST(Config, Defaults) {
  const PipelineConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.backend, BackendKind::Mock);
  EXPECT_EQ(c.k, 25u);
  EXPECT_EQ(c.x, 10u);
  EXPECT_EQ(c.y, 10u);
  EXPECT_EQ(c.n, 4000u);
  EXPECT_DOUBLE_EQ(c.fusion.objective, 0.5);
  EXPECT_EQ(c.models.size(), 6u);
}

TEST(Config, RejectsInvalidValues) {
  auto bad = [](const nlohmann::json& j) { return code_of([&] { (void)config_from_json(j); }); };
  EXPECT_EQ(bad({{"regression", {{"k", 101}}}}), ErrorCode::Config);
  EXPECT_EQ(bad({{"regression", {{"k", 0}}}}), ErrorCode::Config);
  EXPECT_EQ(bad({{"regression", {{"lambda", 0.0}}}}), ErrorCode::Config);
  EXPECT_EQ(bad({{"scoring", {{"x", 0}}}}), ErrorCode::Config);
  EXPECT_EQ(bad({{"scoring", {{"fusion", {{"objective", 0.6}, {"subjective", 0.6}}}}}}), ErrorCode::Config);
  EXPECT_EQ(bad({{"gateway", {{"max_in_flight", 0}}}}), ErrorCode::Config);
  EXPECT_EQ(bad({{"backend", "remote"}}), ErrorCode::Config);
  EXPECT_EQ(bad({{"regression", {{"k", "many"}}}}), ErrorCode::Config);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_EQ(code_of([] { (void)config_from_json({{"colour", "blue"}}); }), ErrorCode::Config);
  EXPECT_EQ(code_of([] { (void)config_from_json({{"scoring", {{"z", 1}}}}); }), ErrorCode::Config);
  EXPECT_EQ(code_of([] { (void)config_from_json({{"models", {{"painter", "m"}}}}); }), ErrorCode::Config);
}

TEST(Config, PartialOverridesKeepDefaults) {
  const auto c = config_from_json({{"regression", {{"k", 100}}}, {"seed", 9}});
  EXPECT_EQ(c.k, 100u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.x, 10u);
  const auto w = config_from_json(
      {{"scoring",
        {{"dimension_weights",
          {{"noun", 0.1}, {"verb", 0.1}, {"adjective", 0.2}, {"function_words", 0.15}, {"coherence", 0.15},
           {"structure", 0.15}, {"collocations", 0.15}}}}}});
  EXPECT_DOUBLE_EQ(w.dimension_weights.weight(Dimension::Noun), 0.1);
}

TEST(Config, JsonRoundTripAndHash) {
  PipelineConfig c;
  c.k = 40;
  c.seed = 123;
  c.fusion = FusionWeights{0.7, 0.3};
  c.models[ModelRole::Judge] = "judge-model";
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 64u);
  PipelineConfig other = c;
  other.seed = 124;
  EXPECT_NE(config_hash(other), config_hash(c));
}

TEST(Config, LoadFromFile) {
  TempDir dir;
  {
    std::ofstream(dir / "c.json") << R"({"seed": 5, "workers": 2})";
    std::ofstream(dir / "broken.json") << "{ seed";
  }
  const auto c = load_config(dir / "c.json");
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.workers, 2u);
  EXPECT_EQ(code_of([&] { (void)load_config(dir / "broken.json"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { (void)load_config(dir / "absent.json"); }), ErrorCode::Io);
}

TEST(Config, ShippedPathsResolve) {
  const PipelineConfig c;
  EXPECT_TRUE(std::filesystem::exists(c.catalog_path()));
  EXPECT_TRUE(std::filesystem::exists(c.prompts_path()));
  EXPECT_TRUE(std::filesystem::exists(c.style_map_path()));
}
