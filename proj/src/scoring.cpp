#include "legalstyle/scoring.hpp"

#include <cmath>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "legalstyle/error.hpp"
#include "legalstyle/parallel.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

void check_range(double v, const char* what) {
  if (!(v >= 0.0 && v <= 10.0)) {
    throw Error(ErrorCode::InvalidScore, std::string(what) + " score " + std::to_string(v) + " outside [0, 10]");
  }
}

std::optional<std::vector<std::string>> parse_queries(std::string_view reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  const auto j = nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("queries") || !j["queries"].is_array()) return std::nullopt;
  std::vector<std::string> out;
  for (const auto& q : j["queries"]) {
    if (q.is_string() && !utf8::is_blank(q.get<std::string>())) out.push_back(utf8::trim(q.get<std::string>()));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::string format_exemplars(const std::vector<ExemplarPair>& pairs) {
  if (pairs.empty()) return "（无）";
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out += std::to_string(i + 1) + ". 正例：" + pairs[i].positive + "\n   反例：" + pairs[i].negative +
           "\n   说明：" + pairs[i].issue.description + "\n";
  }
  return out;
}

}  // namespace

double fuse_linear(double objective, double subjective, const FusionWeights& weights) {
  check_range(objective, "objective");
  check_range(subjective, "subjective");
  return weights.objective * objective + weights.subjective * subjective;
}

double fuse(double objective, double subjective, const FusionWeights& weights) {
  const double combined = fuse_linear(objective, subjective, weights);
  return 1.0 / (1.0 + std::exp(-10.0 * (combined / 10.0 - 0.5)));
}

double score_objective(const FeatureVector& raw, const RegressionModel& model) {
  if (raw.catalog_version != model.catalog_version || raw.values.size() != model.weights.size()) {
    throw Error(ErrorCode::CatalogMismatch, "features from catalog '" + raw.catalog_version +
                                                "' do not match model catalog '" + model.catalog_version + "'");
  }
  const auto z = normalize(raw, model.normalization);
  double dot = 0.0;
  for (auto i : model.selected_indices) dot += model.weights[i] * z.values[i];
  return 10.0 * sigmoid(dot);
}

double score_objective(std::string_view text, const RegressionModel& model, const FeatureExtractor& extractor) {
  return score_objective(extractor.extract(text), model);
}

double score_subjective(const std::array<double, 7>& dimension_scores, const DimensionWeights& weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < kDimensions.size(); ++i) {
    check_range(dimension_scores[i], "dimension");
    total += weights.weight(kDimensions[i]) * dimension_scores[i];
  }
  return total;
}

std::optional<double> parse_judge_score(std::string_view reply) {
  static const std::regex kScore(R"(SCORE\s*(?::|：)\s*\**\s*([-+]?[0-9]+(?:\.[0-9]+)?))", std::regex::icase);
  std::optional<double> last;
  const std::string s(reply);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), kScore); it != std::sregex_iterator(); ++it) {
    last = std::stod((*it)[1].str());
  }
  return last;
}

std::string parse_judge_feedback(std::string_view reply) {
  std::size_t best = std::string_view::npos;
  std::size_t skip = 0;
  for (std::string_view marker : {"FEEDBACK:", "FEEDBACK：", "feedback:", "feedback："}) {
    const auto at = reply.rfind(marker);
    if (at != std::string_view::npos && (best == std::string_view::npos || at > best)) {
      best = at;
      skip = marker.size();
    }
  }
  if (best == std::string_view::npos) return {};
  return utf8::trim(reply.substr(best + skip));
}

Scorer::Scorer(Gateway& gateway, std::shared_ptr<const PromptSet> prompts, const RegressionModel& model,
               const ExperiencePools& pools, const VectorIndex& index, const FeatureExtractor& extractor,
               ScoringOptions options)
    : gateway_(gateway),
      prompts_(std::move(prompts)),
      model_(model),
      pools_(pools),
      index_(index),
      extractor_(extractor),
      options_(options),
      pools_fingerprint_(pools.fingerprint()) {
  if (options_.queries == 0 || options_.retrievals == 0) {
    throw Error(ErrorCode::Config, "query and retrieval counts must be at least 1");
  }
}

void Scorer::check_versions() const {
  if (model_.catalog_version != extractor_.catalog().version()) {
    throw Error(ErrorCode::VersionMismatch, "model catalog '" + model_.catalog_version +
                                                "' differs from extractor catalog '" + extractor_.catalog().version() + "'");
  }
  if (model_.pools_fingerprint != pools_fingerprint_) {
    throw Error(ErrorCode::VersionMismatch, "model was trained on different pools (" + model_.pools_fingerprint.substr(0, 12) +
                                                " vs " + pools_fingerprint_.substr(0, 12) + ")");
  }
  if (pools_.metadata().embedder_id != gateway_.backend().embedder_id()) {
    throw Error(ErrorCode::VersionMismatch, "pools were embedded with '" + pools_.metadata().embedder_id +
                                                "' but the backend embeds with '" + gateway_.backend().embedder_id() + "'");
  }
  if (index_.dimension() != pools_.embedding_dim()) {
    throw Error(ErrorCode::VersionMismatch, "index dimension does not match the pools");
  }
}

std::string Scorer::judge_call(const std::string& task, const std::map<std::string, std::string>& vars,
                               const std::map<std::string, std::string>& payload) const {
  const auto prompt = prompts_->render(task, vars);
  ChatRequest req;
  req.role = ModelRole::Judge;
  req.task = task;
  req.system_prompt = prompt.system;
  req.user_prompt = prompt.user;
  req.format = task.rfind("queries", 0) == 0 ? ResponseFormat::Structured : ResponseFormat::FreeText;
  req.payload = payload;
  return gateway_.complete(req);
}

std::vector<std::string> Scorer::generate_queries(std::string_view text, Dimension d,
                                                  const std::string& analysis) const {
  const std::string name(display_name(d));
  const auto count = std::to_string(options_.queries);
  std::map<std::string, std::string> vars{
      {"dimension_name", name}, {"analysis", analysis}, {"text", std::string(text)}, {"count", count}};
  const std::map<std::string, std::string> payload{{"dimension", name}, {"text", std::string(text)}, {"count", count}};
  auto reply = judge_call("queries", vars, payload);
  auto queries = parse_queries(reply);
  if (!queries) {
    vars["previous"] = reply;
    reply = judge_call("queries_repair", vars, payload);
    queries = parse_queries(reply);
    if (!queries) throw Error(ErrorCode::Protocol, "query generation reply is unparseable", reply);
  }
  std::vector<std::string> out;
  out.reserve(options_.queries);
  for (std::size_t i = 0; i < options_.queries; ++i) out.push_back((*queries)[i % queries->size()]);
  return out;
}

DimensionScore Scorer::score_dimension(std::string_view text, Dimension d) const {
  if (utf8::is_blank(text)) throw Error(ErrorCode::EmptyText, "cannot score empty text");
  DimensionScore result;
  result.dimension = d;
  const std::string name(display_name(d));
  const std::map<std::string, std::string> payload{{"dimension", name}, {"text", std::string(text)}};

  result.analysis = utf8::trim(judge_call("analyze", {{"dimension_name", name}, {"text", std::string(text)}}, payload));
  result.queries = generate_queries(text, d, result.analysis);
  for (const auto& q : result.queries) {
    const auto embedding = gateway_.embed(q);
    for (auto id : index_.top_similar(embedding.values, options_.retrievals)) {
      if (std::find(result.retrieved_ids.begin(), result.retrieved_ids.end(), id) == result.retrieved_ids.end()) {
        result.retrieved_ids.push_back(id);
      }
    }
  }
  const auto exemplars = with_positives(pools_, result.retrieved_ids);

  std::map<std::string, std::string> vars{{"dimension_name", name},
                                          {"exemplars", format_exemplars(exemplars)},
                                          {"analysis", result.analysis},
                                          {"text", std::string(text)}};
  auto reply = judge_call("judge", vars, payload);
  auto score = parse_judge_score(reply);
  if (!score) {
    spdlog::warn("judge reply for {} carried no score; asking once more", to_string(d));
    vars["previous"] = reply;
    reply = judge_call("judge_repair", vars, payload);
    score = parse_judge_score(reply);
    if (!score) throw Error(ErrorCode::JudgeParse, "no parseable score for dimension " + std::string(to_string(d)), reply);
  }
  result.judge_score = *score;
  result.score = std::clamp(*score, 0.0, 10.0);
  if (result.score != *score) {
    spdlog::warn("judge score {} for {} clamped to {}", *score, to_string(d), result.score);
  }
  result.feedback = parse_judge_feedback(reply);
  return result;
}

ScoreReport Scorer::score_document(std::string id, std::string_view text) const {
  if (utf8::is_blank(text)) throw Error(ErrorCode::EmptyText, "cannot score empty text");
  check_versions();
  ScoreReport report;
  report.id = std::move(id);
  report.objective = score_objective(text, model_, extractor_);

  report.dimensions.resize(kDimensions.size());
  parallel_for(kDimensions.size(), options_.workers,
               [&](std::size_t i) { report.dimensions[i] = score_dimension(text, kDimensions[i]); });
  std::array<double, 7> scores{};
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = report.dimensions[i].score;
  report.subjective = score_subjective(scores, options_.weights);
  report.fused_linear = fuse_linear(report.objective, report.subjective, options_.fusion);
  report.fused = fuse(report.objective, report.subjective, options_.fusion);

  const auto& backend = gateway_.backend();
  report.provenance = {
      {"catalog_version", model_.catalog_version},
      {"model_k", model_.k()},
      {"pools_fingerprint", pools_fingerprint_},
      {"pool_size", pools_.size()},
      {"embedder_id", backend.embedder_id()},
      {"judge_model", backend.model_for(ModelRole::Judge)},
      {"prompt_version", prompts_->version()},
      {"backend_deterministic", backend.deterministic()},
      {"queries", options_.queries},
      {"retrievals", options_.retrievals},
      {"fusion_weights", {{"objective", options_.fusion.objective}, {"subjective", options_.fusion.subjective}}},
  };
  return report;
}

nlohmann::json to_json(const ScoreReport& report, const DimensionWeights& weights) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : report.dimensions) {
    dims.push_back({{"dimension", std::string(to_string(d.dimension))},
                    {"name", std::string(display_name(d.dimension))},
                    {"weight", weights.weight(d.dimension)},
                    {"score", d.score},
                    {"judge_score", d.judge_score},
                    {"analysis", d.analysis},
                    {"queries", d.queries},
                    {"retrieved_pair_ids", d.retrieved_ids},
                    {"feedback", d.feedback}});
  }
  return {{"id", report.id},
          {"objective", report.objective},
          {"subjective", report.subjective},
          {"fused_linear", report.fused_linear},
          {"fused", report.fused},
          {"dimensions", dims},
          {"provenance", report.provenance}};
}

std::string render_summary(const ScoreReport& report) {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(3);
  out << report.id << "\n";
  out << "  objective  " << report.objective << "\n";
  out << "  subjective " << report.subjective << "\n";
  out << "  fused      " << report.fused << "\n";
  for (const auto& d : report.dimensions) {
    out << "  [" << display_name(d.dimension) << "] " << d.score << "  " << d.feedback << "\n";
  }
  return out.str();
}

}  // namespace legalstyle
