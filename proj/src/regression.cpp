#include "legalstyle/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"

namespace legalstyle {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

struct Design {
  Eigen::MatrixXd x;  // n x (d + 1), last column is the intercept
  Eigen::VectorXd y;
};

Design make_design(std::span<const LabeledExample> examples) {
  const auto n = static_cast<Eigen::Index>(examples.size());
  const auto d = static_cast<Eigen::Index>(examples.front().features.values.size());
  Design design{Eigen::MatrixXd(n, d + 1), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ex = examples[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(ex.features.values.size()) != d ||
        ex.features.catalog_version != examples.front().features.catalog_version) {
      throw Error(ErrorCode::CatalogMismatch, "training examples disagree on catalog version or size");
    }
    if (ex.label != 0 && ex.label != 1) throw Error(ErrorCode::Config, "labels must be 0 or 1");
    for (Eigen::Index j = 0; j < d; ++j) design.x(i, j) = ex.features.values[static_cast<std::size_t>(j)];
    design.x(i, d) = 1.0;
    design.y(i) = ex.label;
  }
  return design;
}

double objective(const Design& design, const Eigen::VectorXd& theta, double lambda) {
  const Eigen::VectorXd z = design.x * theta;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += design.y(i) > 0.5 ? softplus(-z(i)) : softplus(z(i));
  }
  const auto d = theta.size() - 1;
  return loss / static_cast<double>(z.size()) + lambda * theta.head(d).squaredNorm();
}

Eigen::VectorXd gradient(const Design& design, const Eigen::VectorXd& theta, double lambda, Eigen::VectorXd* probs) {
  const Eigen::VectorXd z = design.x * theta;
  Eigen::VectorXd p(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) p(i) = sigmoid(z(i));
  Eigen::VectorXd g = design.x.transpose() * (p - design.y) / static_cast<double>(z.size());
  const auto d = theta.size() - 1;
  g.head(d) += 2.0 * lambda * theta.head(d);
  if (probs != nullptr) *probs = std::move(p);
  return g;
}

}  // namespace

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LossAndGradient regularized_loss(std::span<const double> weights, double bias,
                                 std::span<const LabeledExample> examples, double lambda) {
  if (examples.empty()) throw Error(ErrorCode::InsufficientData, "no examples");
  const Design design = make_design(examples);
  if (static_cast<Eigen::Index>(weights.size()) + 1 != design.x.cols()) {
    throw Error(ErrorCode::CatalogMismatch, "weight vector length does not match features");
  }
  Eigen::VectorXd theta(design.x.cols());
  for (std::size_t j = 0; j < weights.size(); ++j) theta(static_cast<Eigen::Index>(j)) = weights[j];
  theta(theta.size() - 1) = bias;
  const Eigen::VectorXd g = gradient(design, theta, lambda, nullptr);
  LossAndGradient out;
  out.loss = objective(design, theta, lambda);
  out.grad_weights.assign(g.data(), g.data() + g.size() - 1);
  out.grad_bias = g(g.size() - 1);
  return out;
}

RegressionModel train(std::span<const LabeledExample> examples, double lambda, const TrainOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorCode::Config, "lambda must be a positive finite number");
  if (examples.empty()) throw Error(ErrorCode::InsufficientData, "no training examples");
  const bool has_pos = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label == 1; });
  const bool has_neg = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label == 0; });
  if (!has_pos || !has_neg) {
    throw Error(ErrorCode::DegenerateLabels, "training data must contain both positive and negative examples");
  }

  const Design design = make_design(examples);
  const auto cols = design.x.cols();
  const auto d = cols - 1;
  const double n = static_cast<double>(design.x.rows());

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(cols);
  Eigen::VectorXd probs;
  Eigen::VectorXd g = gradient(design, theta, lambda, &probs);
  double f = objective(design, theta, lambda);

  RegressionModel model;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < options.tolerance) {
      model.converged = true;
      break;
    }
    Eigen::VectorXd curvature = (probs.array() * (1.0 - probs.array())).matrix();
    Eigen::MatrixXd hessian = design.x.transpose() * curvature.asDiagonal() * design.x / n;
    hessian.diagonal().head(d).array() += 2.0 * lambda;
    hessian(d, d) += 1e-12;
    Eigen::VectorXd step = hessian.ldlt().solve(-g);
    double slope = g.dot(step);
    if (!step.allFinite() || slope >= 0.0) {
      step = -g;
      slope = -g.squaredNorm();
    }

    double t = 1.0;
    double f_new = objective(design, theta + step, lambda);
    while (f_new > f + 1e-4 * t * slope && t > 1e-12) {
      t *= 0.5;
      f_new = objective(design, theta + t * step, lambda);
    }
    if (t <= 1e-12) break;  // no further descent possible at machine precision
    theta += t * step;
    f = f_new;
    g = gradient(design, theta, lambda, &probs);
  }
  if (!model.converged && g.lpNorm<Eigen::Infinity>() < options.tolerance) model.converged = true;

  model.weights.assign(theta.data(), theta.data() + d);
  model.bias = theta(d);
  model.lambda = lambda;
  model.iterations = iter;
  model.catalog_version = examples.front().features.catalog_version;
  model.selected_indices.resize(static_cast<std::size_t>(d));
  std::iota(model.selected_indices.begin(), model.selected_indices.end(), std::size_t{0});
  for (double w : model.weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::Format, "training diverged to non-finite weights");
  }
  return select_top_k(std::move(model), static_cast<std::size_t>(d));
}

double predict_probability(const RegressionModel& model, const FeatureVector& normalized) {
  if (normalized.catalog_version != model.catalog_version || normalized.values.size() != model.weights.size()) {
    throw Error(ErrorCode::CatalogMismatch, "feature vector does not match the model's catalog");
  }
  double z = model.bias;
  for (std::size_t i = 0; i < model.weights.size(); ++i) z += model.weights[i] * normalized.values[i];
  return sigmoid(z);
}

RegressionModel select_top_k(RegressionModel model, std::size_t k) {
  if (k == 0 || k > model.weights.size()) {
    throw Error(ErrorCode::InvalidK, "k = " + std::to_string(k) + " outside [1, " +
                                         std::to_string(model.weights.size()) + "]");
  }
  std::vector<std::size_t> order(model.weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(model.weights[a]) > std::abs(model.weights[b]);
  });
  order.resize(k);
  model.selected_indices = std::move(order);
  return model;
}

nlohmann::json to_json(const RegressionModel& model) {
  return nlohmann::json{
      {"schema", kModelSchemaVersion},
      {"catalog_version", model.catalog_version},
      {"feature_ids", model.feature_ids},
      {"weights", model.weights},
      {"bias", model.bias},
      {"lambda", model.lambda},
      {"k", model.k()},
      {"selected_indices", model.selected_indices},
      {"normalization", to_json(model.normalization)},
      {"pools_fingerprint", model.pools_fingerprint},
      {"training", {{"iterations", model.iterations}, {"converged", model.converged}}},
  };
}

RegressionModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema").get<int>() != kModelSchemaVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported model schema " + j.at("schema").dump());
    }
    RegressionModel m;
    m.catalog_version = j.at("catalog_version").get<std::string>();
    m.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.selected_indices = j.at("selected_indices").get<std::vector<std::size_t>>();
    m.normalization = normalization_from_json(j.at("normalization"));
    m.pools_fingerprint = j.value("pools_fingerprint", "");
    if (j.contains("training")) {
      m.iterations = j["training"].value("iterations", 0);
      m.converged = j["training"].value("converged", false);
    }
    if (j.at("k").get<std::size_t>() != m.selected_indices.size()) {
      throw Error(ErrorCode::Format, "model k disagrees with selected_indices");
    }
    if (m.normalization.mean.size() != m.weights.size()) {
      throw Error(ErrorCode::Format, "model normalization length disagrees with weights");
    }
    for (auto idx : m.selected_indices) {
      if (idx >= m.weights.size()) throw Error(ErrorCode::Format, "selected index out of range");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("malformed model file: ") + e.what());
  }
}

std::string serialize_model(const RegressionModel& model) { return to_json(model).dump(2) + "\n"; }

void save_model(const std::filesystem::path& path, const RegressionModel& model) {
  write_file(path, serialize_model(model));
}

RegressionModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Format, path.string() + ": " + e.what());
  }
}

}  // namespace legalstyle
