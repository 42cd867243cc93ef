#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "legalstyle/features.hpp"

namespace legalstyle {

/// A normalized feature vector with its class: 1 = positive, 0 = negative.
struct LabeledExample {
  FeatureVector features;
  int label = 0;
};

struct TrainOptions {
  double tolerance = 1e-6;
  int max_iterations = 10000;
};

struct RegressionModel {
  std::vector<double> weights;
  double bias = 0.0;
  NormalizationParams normalization;
  std::vector<std::size_t> selected_indices;
  double lambda = 1.0;
  std::string catalog_version;
  std::vector<std::string> feature_ids;
  /// Fingerprint of the experience pools the model was trained on; empty
  /// for models built outside the pipeline.
  std::string pools_fingerprint;
  int iterations = 0;
  bool converged = false;

  [[nodiscard]] std::size_t k() const noexcept { return selected_indices.size(); }
  bool operator==(const RegressionModel&) const = default;
};

inline constexpr int kModelSchemaVersion = 1;

double sigmoid(double z) noexcept;

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad_weights;
  double grad_bias = 0.0;
};

/// Mean logistic loss plus lambda * ||w||^2 (bias unpenalized) and its gradient.
LossAndGradient regularized_loss(std::span<const double> weights, double bias,
                                 std::span<const LabeledExample> examples, double lambda);

/// Minimizes the regularized loss from w = 0, b = 0 by damped Newton steps
/// with backtracking; stops when the gradient's infinity norm drops below
/// `options.tolerance`. All features are selected in the returned model.
RegressionModel train(std::span<const LabeledExample> examples, double lambda, const TrainOptions& options = {});

/// sigma(w.v + b) with the full weight vector and the bias.
double predict_probability(const RegressionModel& model, const FeatureVector& normalized);

/// Keeps the weights, records the k positions with the largest |w| (ties to
/// the lower index), ordered by descending |w|.
RegressionModel select_top_k(RegressionModel model, std::size_t k);

nlohmann::json to_json(const RegressionModel& model);
RegressionModel model_from_json(const nlohmann::json& j);
std::string serialize_model(const RegressionModel& model);
void save_model(const std::filesystem::path& path, const RegressionModel& model);
RegressionModel load_model(const std::filesystem::path& path);

}  // namespace legalstyle
