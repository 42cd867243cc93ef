#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "legalstyle/error.hpp"
#include "legalstyle/regression.hpp"
#include "support.hpp"

using namespace legalstyle;

namespace {

LabeledExample ex(std::vector<double> x, int label) { return LabeledExample{FeatureVector{std::move(x), "t"}, label}; }

double l2norm(const std::vector<double>& w) {
  double s = 0;
  for (double x : w) s += x * x;
  return std::sqrt(s);
}

// Independent reference: plain full-batch gradient descent on
// mean log-loss + lambda*|w|^2 (bias unpenalized), gradient written out by hand.
std::pair<std::vector<double>, double> gd_oracle(const std::vector<LabeledExample>& data, double lambda, int steps,
                                                 double lr) {
  const std::size_t d = data.front().features.values.size();
  std::vector<double> w(d, 0.0);
  double b = 0.0;
  for (int s = 0; s < steps; ++s) {
    std::vector<double> gw(d, 0.0);
    double gb = 0.0;
    for (const auto& e : data) {
      double z = b;
      for (std::size_t j = 0; j < d; ++j) z += w[j] * e.features.values[j];
      const double r = 1.0 / (1.0 + std::exp(-z)) - e.label;
      for (std::size_t j = 0; j < d; ++j) gw[j] += r * e.features.values[j] / static_cast<double>(data.size());
      gb += r / static_cast<double>(data.size());
    }
    for (std::size_t j = 0; j < d; ++j) w[j] -= lr * (gw[j] + 2.0 * lambda * w[j]);
    b -= lr * gb;
  }
  return {w, b};
}

std::vector<LabeledExample> make_random_data(std::mt19937& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> nd;
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (auto& v : x) v = nd(rng);
    out.push_back(ex(x, i % 2 == 0 ? 1 : 0));
  }
  return out;
}

}  // namespace

TEST(Regression, GradientMatchesCentralDifferences) {
  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    const auto data = make_random_data(rng, 8 + trial % 5, 1 + trial % 4);
    const std::size_t d = data.front().features.values.size();
    std::vector<double> w(d);
    for (auto& v : w) v = nd(rng);
    const double b = nd(rng);
    const double lambda = 0.05 * (1 + trial % 3);
    const auto lg = regularized_loss(w, b, data, lambda);
    const double h = 1e-5;
    for (std::size_t j = 0; j <= d; ++j) {
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (j < d) {
        wp[j] += h;
        wm[j] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      const double num = (regularized_loss(wp, bp, data, lambda).loss - regularized_loss(wm, bm, data, lambda).loss) / (2 * h);
      const double ana = j < d ? lg.grad_weights[j] : lg.grad_bias;
      EXPECT_LT(std::abs(num - ana) / std::max(1e-8, std::abs(num) + std::abs(ana)), 1e-5);
    }
  }
}

TEST(Regression, OneDimensionalExampleAgreesWithGradientDescent) {
  const std::vector<LabeledExample> data = {ex({-1.0}, 0), ex({1.0}, 1)};
  const auto m = train(data, 0.01);
  EXPECT_GT(m.weights[0], 0.0);
  EXPECT_TRUE(m.converged);
  const auto [w, b] = gd_oracle(data, 0.01, 200000, 0.5);
  EXPECT_NEAR(m.weights[0], w[0], 1e-5);
  EXPECT_NEAR(m.bias, b, 1e-5);
}

TEST(Regression, AgreesWithGradientDescentOnRandomData) {
  std::mt19937 rng(3);
  const auto data = make_random_data(rng, 30, 3);
  const auto m = train(data, 0.1);
  const auto [w, b] = gd_oracle(data, 0.1, 20000, 0.5);
  for (std::size_t j = 0; j < w.size(); ++j) EXPECT_NEAR(m.weights[j], w[j], 1e-6);
  EXPECT_NEAR(m.bias, b, 1e-6);
}

TEST(Regression, SeparableToySetIsFit) {
  std::vector<LabeledExample> data;
  for (int i = 0; i < 20; ++i) {
    const double t = i * 0.37;
    data.push_back(ex({1.0 + std::sin(t), 1.0 + std::cos(t)}, 1));
    data.push_back(ex({-1.0 - std::cos(t), -1.0 + 0.5 * std::sin(t)}, 0));
  }
  const auto m = train(data, 0.01);
  for (const auto& e : data) {
    const double p = predict_probability(m, e.features);
    EXPECT_EQ(p > 0.5 ? 1 : 0, e.label);
  }
}

TEST(Regression, WeightNormShrinksWithLambda) {
  std::mt19937 rng(5);
  auto data = make_random_data(rng, 40, 4);
  for (auto& e : data) e.features.values[0] += e.label == 1 ? 1.0 : -1.0;
  double prev = INFINITY;
  for (double lambda : {0.01, 0.1, 1.0, 10.0, 1e6}) {
    const double n = l2norm(train(data, lambda).weights);
    EXPECT_LE(n, prev + 1e-12) << lambda;
    prev = n;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Regression, DegenerateLabelsRejected) {
  const std::vector<LabeledExample> data = {ex({1.0}, 1), ex({2.0}, 1)};
  try {
    (void)train(data, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLabels);
  }
  EXPECT_THROW((void)train(std::vector<LabeledExample>{}, 1.0), Error);
  EXPECT_THROW((void)train(std::vector<LabeledExample>{ex({1}, 1), ex({0}, 0)}, 0.0), Error);
}

TEST(Regression, CatalogMismatchRejected) {
  const std::vector<LabeledExample> data = {ex({1.0}, 1), LabeledExample{FeatureVector{{0.0}, "other"}, 0}};
  try {
    (void)train(data, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CatalogMismatch);
  }
}

TEST(Prediction, SigmoidValues) {
  RegressionModel m;
  m.weights = {0.0, 0.0};
  m.bias = 0.0;
  m.catalog_version = "t";
  EXPECT_DOUBLE_EQ(predict_probability(m, FeatureVector{{3.0, -4.0}, "t"}), 0.5);
  m.weights = {1.0, 0.5};
  m.bias = -1.0;
  EXPECT_DOUBLE_EQ(predict_probability(m, FeatureVector{{1.0, 0.0}, "t"}), 0.5);
  EXPECT_NEAR(predict_probability(m, FeatureVector{{1.0, 4.0}, "t"}), 1.0 / (1.0 + std::exp(-2.0)), 1e-15);
  double prev = 0.0;
  for (double x = -30; x <= 30; x += 0.5) {
    const double p = predict_probability(m, FeatureVector{{x, 0.0}, "t"});
    EXPECT_GT(p, prev);
    prev = p;
  }
  EXPECT_THROW((void)predict_probability(m, FeatureVector{{1.0}, "t"}), Error);
}

TEST(TopK, SelectsLargestMagnitudes) {
  RegressionModel m;
  m.weights = {0.1, -3.0, 2.0, -0.5};
  EXPECT_EQ(select_top_k(m, 2).selected_indices, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(select_top_k(m, 4).selected_indices, (std::vector<std::size_t>{1, 2, 3, 0}));
  m.weights = {0.7, 0.1, 0.2, -0.7};
  EXPECT_EQ(select_top_k(m, 1).selected_indices, (std::vector<std::size_t>{0}));
  try {
    (void)select_top_k(m, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidK);
  }
  EXPECT_THROW((void)select_top_k(m, 5), Error);
}

TEST(ModelFile, RoundTripsByteIdentically) {
  std::mt19937 rng(9);
  const auto data = make_random_data(rng, 12, 3);
  auto m = train(data, 0.5);
  m.normalization = NormalizationParams{{0, 1, 2}, {1, 1, 0}, "t"};
  m = select_top_k(std::move(m), 2);
  test_support::TempDir dir;
  save_model(dir / "m.json", m);
  const auto back = load_model(dir / "m.json");
  EXPECT_EQ(serialize_model(back), serialize_model(m));
  EXPECT_EQ(back.selected_indices, m.selected_indices);
  EXPECT_EQ(back.weights, m.weights);

  auto j = to_json(m);
  j["schema"] = 99;
  try {
    (void)model_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::VersionMismatch);
  }
}
