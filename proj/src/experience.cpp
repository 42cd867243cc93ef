#include "legalstyle/experience.hpp"

#include <cmath>
#include <fstream>

#include <spdlog/spdlog.h>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/hashing.hpp"
#include "legalstyle/jsonl.hpp"
#include "legalstyle/parallel.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

constexpr int kPoolSchemaVersion = 1;
constexpr const char* kPositivesFile = "positives.jsonl";
constexpr const char* kNegativesFile = "negatives.jsonl";
constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kProgressFile = "progress.json";

nlohmann::json issue_to_json(const StyleIssue& issue) {
  return {{"dimension", std::string(to_string(issue.dimension))},
          {"description", issue.description},
          {"gold_span", issue.gold_span},
          {"restored_span", issue.restored_span}};
}

StyleIssue issue_from_json(const nlohmann::json& j) {
  const auto dim = parse_dimension(j.at("dimension").get<std::string>());
  if (!dim) throw Error(ErrorCode::Format, "unknown dimension " + j.at("dimension").dump());
  return StyleIssue{*dim, j.at("description").get<std::string>(), j.at("gold_span").get<std::string>(),
                    j.at("restored_span").get<std::string>()};
}

std::string positive_line(const ExemplarPair& p) {
  return nlohmann::json{{"pair_id", p.pair_id},
                        {"text", p.positive},
                        {"embedding", p.positive_embedding.values},
                        {"doc_id", p.source_doc_id},
                        {"issue", issue_to_json(p.issue)}}
      .dump();
}

std::string negative_line(const ExemplarPair& p) {
  return nlohmann::json{{"pair_id", p.pair_id}, {"text", p.negative}, {"embedding", p.negative_embedding.values}}
      .dump();
}

std::vector<std::string> split_lines(const std::string& content) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    if (end > pos) lines.emplace_back(content.substr(pos, end - pos));
    pos = end + 1;
  }
  return lines;
}

// Rebuilds pools from aligned positive/negative lines.
ExperiencePools pools_from_lines(const PoolMetadata& metadata, const std::vector<std::string>& pos,
                                 const std::vector<std::string>& neg, const std::string& where) {
  if (pos.size() != neg.size()) {
    throw Error(ErrorCode::Format, where + ": positive and negative pools differ in size (" +
                                       std::to_string(pos.size()) + " vs " + std::to_string(neg.size()) + ")");
  }
  ExperiencePools pools(metadata);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    try {
      const auto p = nlohmann::json::parse(pos[i]);
      const auto n = nlohmann::json::parse(neg[i]);
      if (p.at("pair_id").get<std::size_t>() != i || n.at("pair_id").get<std::size_t>() != i) {
        throw Error(ErrorCode::Format, where + ": pair ids are not contiguous at line " + std::to_string(i + 1));
      }
      ExemplarPair pair;
      pair.positive = p.at("text").get<std::string>();
      pair.negative = n.at("text").get<std::string>();
      pair.issue = issue_from_json(p.at("issue"));
      pair.source_doc_id = p.value("doc_id", "");
      pair.positive_embedding = EmbeddingVector{p.at("embedding").get<std::vector<double>>(), metadata.embedder_id};
      pair.negative_embedding = EmbeddingVector{n.at("embedding").get<std::vector<double>>(), metadata.embedder_id};
      if (!pools.add(std::move(pair))) {
        throw Error(ErrorCode::Format, where + ": duplicate exemplar pair at line " + std::to_string(i + 1));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, where + ":" + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return pools;
}

nlohmann::json metadata_to_json(const PoolMetadata& m) {
  return {{"prompt_version", m.prompt_version},
          {"identify_model", m.identify_model},
          {"embedder_id", m.embedder_id},
          {"backend_deterministic", m.backend_deterministic}};
}

PoolMetadata metadata_from_json(const nlohmann::json& j) {
  return PoolMetadata{j.at("prompt_version").get<std::string>(), j.at("identify_model").get<std::string>(),
                      j.at("embedder_id").get<std::string>(), j.at("backend_deterministic").get<bool>()};
}

std::string dimension_list() {
  std::string out;
  for (auto d : kDimensions) {
    if (!out.empty()) out += "，";
    out += std::string(to_string(d)) + "（" + std::string(display_name(d)) + "）";
  }
  return out;
}

void append_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path.string());
  for (const auto& l : lines) out << l << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::vector<std::string> first_lines(const std::filesystem::path& path, std::size_t count) {
  auto lines = std::filesystem::exists(path) ? split_lines(read_file(path)) : std::vector<std::string>{};
  if (lines.size() < count) {
    throw Error(ErrorCode::Format, path.string() + " holds fewer lines than its progress record");
  }
  lines.resize(count);
  return lines;
}

}  // namespace

std::optional<std::size_t> ExperiencePools::add(ExemplarPair pair) {
  if (!seen_.emplace(pair.positive, pair.negative).second) return std::nullopt;
  pair.pair_id = pairs_.size();
  pairs_.push_back(std::move(pair));
  return pairs_.back().pair_id;
}

const ExemplarPair& ExperiencePools::pair(std::size_t id) const {
  if (id >= pairs_.size()) {
    throw Error(ErrorCode::MissingPair, "no exemplar pair with id " + std::to_string(id) + " (pool size " +
                                            std::to_string(pairs_.size()) + ")");
  }
  return pairs_[id];
}

std::size_t ExperiencePools::embedding_dim() const noexcept {
  return pairs_.empty() ? 0 : pairs_.front().negative_embedding.values.size();
}

std::string ExperiencePools::positives_jsonl() const {
  std::string out;
  for (const auto& p : pairs_) out += positive_line(p) + "\n";
  return out;
}

std::string ExperiencePools::negatives_jsonl() const {
  std::string out;
  for (const auto& p : pairs_) out += negative_line(p) + "\n";
  return out;
}

std::string ExperiencePools::fingerprint() const {
  return sha256_hex(positives_jsonl() + "\x1e" + negatives_jsonl());
}

void save_pools(const ExperiencePools& pools, const std::filesystem::path& dir, const nlohmann::json& extra) {
  const auto pos = pools.positives_jsonl();
  const auto neg = pools.negatives_jsonl();
  nlohmann::json manifest{
      {"schema", kPoolSchemaVersion},
      {"status", "final"},
      {"count", pools.size()},
      {"embedding_dim", pools.embedding_dim()},
      {"metadata", metadata_to_json(pools.metadata())},
      {"files",
       {{kPositivesFile, {{"sha256", sha256_hex(pos)}, {"lines", pools.size()}}},
        {kNegativesFile, {{"sha256", sha256_hex(neg)}, {"lines", pools.size()}}}}},
      {"fingerprint", sha256_hex(pos + "\x1e" + neg)},
  };
  if (!extra.is_null()) manifest["build"] = extra;
  write_file(dir / kPositivesFile, pos);
  write_file(dir / kNegativesFile, neg);
  write_file(dir / kManifestFile, manifest.dump(2) + "\n");
}

ExperiencePools load_pools(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / kManifestFile));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, (dir / kManifestFile).string() + ": " + e.what());
  }
  try {
    if (manifest.at("schema").get<int>() != kPoolSchemaVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported pool schema " + manifest.at("schema").dump());
    }
    if (manifest.at("status").get<std::string>() != "final") {
      throw Error(ErrorCode::Format, dir.string() + ": pools are not finalized");
    }
    const auto pos = read_file(dir / kPositivesFile);
    const auto neg = read_file(dir / kNegativesFile);
    if (sha256_hex(pos) != manifest.at("files").at(kPositivesFile).at("sha256").get<std::string>() ||
        sha256_hex(neg) != manifest.at("files").at(kNegativesFile).at("sha256").get<std::string>()) {
      throw Error(ErrorCode::Format, dir.string() + ": pool file checksum does not match the manifest");
    }
    auto pools = pools_from_lines(metadata_from_json(manifest.at("metadata")), split_lines(pos), split_lines(neg),
                                  dir.string());
    if (pools.size() != manifest.at("count").get<std::size_t>()) {
      throw Error(ErrorCode::Format, dir.string() + ": pool size does not match the manifest count");
    }
    return pools;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, (dir / kManifestFile).string() + ": " + e.what());
  }
}

std::optional<std::vector<nlohmann::json>> parse_issue_list(std::string_view reply) {
  const auto open = reply.find_first_of("{[");
  const auto close = reply.find_last_of("}]");
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
  const auto j = nlohmann::json::parse(reply.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded()) return std::nullopt;
  const nlohmann::json* list = nullptr;
  if (j.is_array()) {
    list = &j;
  } else if (j.is_object() && j.contains("issues") && j["issues"].is_array()) {
    list = &j["issues"];
  } else {
    return std::nullopt;
  }
  std::vector<nlohmann::json> out;
  for (const auto& item : *list) {
    if (!item.is_object()) return std::nullopt;
    out.push_back(item);
  }
  return out;
}

ExperienceLearner::ExperienceLearner(Gateway& gateway, std::shared_ptr<const PromptSet> prompts, LearnOptions options)
    : gateway_(gateway), prompts_(std::move(prompts)), options_(options) {
  if (options_.checkpoint_every == 0) throw Error(ErrorCode::Config, "checkpoint_every must be at least 1");
}

PoolMetadata ExperienceLearner::metadata() const {
  const auto& backend = gateway_.backend();
  return PoolMetadata{prompts_->version(), backend.model_for(ModelRole::Identify), backend.embedder_id(),
                      backend.deterministic()};
}

std::vector<StyleIssue> ExperienceLearner::identify_issues(const ContrastivePair& pair, std::size_t* dropped) const {
  std::map<std::string, std::string> vars{{"dimensions", dimension_list()}, {"gold", pair.gold},
                                          {"restored", pair.restored}};
  ChatRequest req;
  req.role = ModelRole::Identify;
  req.task = "identify";
  req.format = ResponseFormat::Structured;
  req.payload = {{"gold", pair.gold}, {"restored", pair.restored}};
  auto prompt = prompts_->render("identify", vars);
  req.system_prompt = prompt.system;
  req.user_prompt = prompt.user;
  auto reply = gateway_.complete(req);
  auto items = parse_issue_list(reply);
  if (!items) {
    spdlog::warn("identify reply for {} was unparseable; asking once more", pair.doc_id);
    vars["previous"] = reply;
    prompt = prompts_->render("identify_repair", vars);
    req.task = "identify_repair";
    req.system_prompt = prompt.system;
    req.user_prompt = prompt.user;
    reply = gateway_.complete(req);
    items = parse_issue_list(reply);
    if (!items) throw Error(ErrorCode::IdentifyParse, "unparseable issue list for " + pair.doc_id, reply);
  }

  std::vector<StyleIssue> issues;
  std::size_t drop_count = 0;
  auto drop = [&](const std::string& why) {
    ++drop_count;
    spdlog::info("dropping issue for {}: {}", pair.doc_id, why);
  };
  for (const auto& item : *items) {
    auto text_field = [&](const char* key) -> std::optional<std::string> {
      const auto it = item.find(key);
      if (it == item.end() || !it->is_string()) return std::nullopt;
      return it->get<std::string>();
    };
    const auto dim_name = text_field("dimension");
    const auto description = text_field("description");
    const auto gold_span = text_field("gold_span");
    const auto restored_span = text_field("restored_span");
    if (!dim_name || !description || !gold_span || !restored_span) {
      drop("missing field");
      continue;
    }
    const auto dim = parse_dimension(*dim_name);
    if (!dim) {
      drop("unknown dimension '" + *dim_name + "'");
      continue;
    }
    if (utf8::is_blank(*description) || utf8::is_blank(*gold_span) || utf8::is_blank(*restored_span)) {
      drop("empty description or span");
      continue;
    }
    if (pair.gold.find(*gold_span) == std::string::npos) {
      drop("gold span not found verbatim: " + *gold_span);
      continue;
    }
    if (pair.restored.find(*restored_span) == std::string::npos) {
      drop("restored span not found verbatim: " + *restored_span);
      continue;
    }
    if (*gold_span == *restored_span) {
      drop("gold and restored spans are identical");
      continue;
    }
    issues.push_back(StyleIssue{*dim, *description, *gold_span, *restored_span});
  }
  if (dropped != nullptr) *dropped = drop_count;
  return issues;
}

ExemplarPair ExperienceLearner::extract_exemplars(const StyleIssue& issue, const std::string& doc_id) const {
  ExemplarPair pair;
  pair.positive = issue.gold_span;
  pair.negative = issue.restored_span;
  pair.issue = issue;
  pair.source_doc_id = doc_id;
  pair.positive_embedding = gateway_.embed(pair.positive);
  pair.negative_embedding = gateway_.embed(pair.negative);
  for (const auto* e : {&pair.positive_embedding, &pair.negative_embedding}) {
    double norm = 0.0;
    for (double v : e->values) norm += v * v;
    if (!(norm > 0.0)) throw Error(ErrorCode::ZeroVector, "zero-norm embedding for exemplar of " + doc_id);
  }
  return pair;
}

ExperienceLearner::PairOutcome ExperienceLearner::process(const ContrastivePair& pair) const {
  PairOutcome out;
  try {
    for (const auto& issue : identify_issues(pair, &out.dropped)) {
      out.exemplars.push_back(extract_exemplars(issue, pair.doc_id));
    }
  } catch (const Error& e) {
    out.exemplars.clear();
    out.failure = e.what();
  }
  return out;
}

ExperiencePools ExperienceLearner::build_pools(std::span<const ContrastivePair> pairs, LearnSummary* summary) const {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPools, "no contrastive pairs to learn from");
  std::vector<PairOutcome> outcomes(pairs.size());
  parallel_for(pairs.size(), options_.workers, [&](std::size_t i) { outcomes[i] = process(pairs[i]); });

  ExperiencePools pools(metadata());
  LearnSummary s;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    ++s.pairs_processed;
    s.issues_dropped += outcomes[i].dropped;
    if (outcomes[i].failure) {
      ++s.pairs_skipped;
      spdlog::warn("skipping pair {}: {}", pairs[i].doc_id, *outcomes[i].failure);
      continue;
    }
    for (auto& e : outcomes[i].exemplars) {
      if (!pools.add(std::move(e))) ++s.duplicates;
    }
  }
  if (pools.empty()) throw Error(ErrorCode::EmptyPools, "no exemplars extracted from " + std::to_string(pairs.size()) + " pairs");
  s.finalized = true;
  if (summary != nullptr) *summary = s;
  return pools;
}

LearnSummary ExperienceLearner::build_pools_in(std::span<const ContrastivePair> pairs,
                                               const std::filesystem::path& dir) const {
  if (pairs.empty()) throw Error(ErrorCode::EmptyPools, "no contrastive pairs to learn from");
  const auto pairs_fingerprint = sha256_hex(pairs_to_jsonl(std::vector<ContrastivePair>(pairs.begin(), pairs.end())));
  const auto pos_part = dir / (std::string(kPositivesFile) + ".part");
  const auto neg_part = dir / (std::string(kNegativesFile) + ".part");
  const auto progress_path = dir / kProgressFile;
  std::filesystem::create_directories(dir);

  LearnSummary s;
  ExperiencePools pools(metadata());
  if (std::filesystem::exists(progress_path)) {
    const auto progress = nlohmann::json::parse(read_file(progress_path));
    if (progress.at("pairs_fingerprint").get<std::string>() != pairs_fingerprint) {
      throw Error(ErrorCode::Config, dir.string() + " holds an unfinished build over different pairs; remove it first");
    }
    if (metadata_from_json(progress.at("metadata")) != pools.metadata()) {
      throw Error(ErrorCode::VersionMismatch, dir.string() + " holds an unfinished build from another backend");
    }
    const auto size = progress.at("pool_size").get<std::size_t>();
    const auto pos = first_lines(pos_part, size);
    const auto neg = first_lines(neg_part, size);
    pools = pools_from_lines(pools.metadata(), pos, neg, dir.string());
    write_file(pos_part, join_lines(pos));
    write_file(neg_part, join_lines(neg));
    s.pairs_processed = progress.at("pairs_processed").get<std::size_t>();
    s.pairs_skipped = progress.at("pairs_skipped").get<std::size_t>();
    s.issues_dropped = progress.at("issues_dropped").get<std::size_t>();
    s.duplicates = progress.at("duplicates").get<std::size_t>();
    s.resumed = true;
    spdlog::info("resuming pool build at pair {} of {}", s.pairs_processed, pairs.size());
  } else {
    std::filesystem::remove(pos_part);
    std::filesystem::remove(neg_part);
  }

  auto checkpoint = [&] {
    const nlohmann::json progress{{"pairs_fingerprint", pairs_fingerprint},
                                  {"metadata", metadata_to_json(pools.metadata())},
                                  {"pairs_processed", s.pairs_processed},
                                  {"pairs_skipped", s.pairs_skipped},
                                  {"issues_dropped", s.issues_dropped},
                                  {"duplicates", s.duplicates},
                                  {"pool_size", pools.size()}};
    write_file(progress_path, progress.dump(2) + "\n");
  };

  while (s.pairs_processed < pairs.size()) {
    if (options_.stop_after && s.pairs_processed >= *options_.stop_after) {
      checkpoint();
      return s;
    }
    std::size_t batch = std::min(options_.checkpoint_every, pairs.size() - s.pairs_processed);
    if (options_.stop_after) batch = std::min(batch, *options_.stop_after - s.pairs_processed);
    const auto begin = s.pairs_processed;
    std::vector<PairOutcome> outcomes(batch);
    parallel_for(batch, options_.workers, [&](std::size_t i) { outcomes[i] = process(pairs[begin + i]); });

    std::vector<std::string> pos_lines;
    std::vector<std::string> neg_lines;
    for (std::size_t i = 0; i < batch; ++i) {
      s.issues_dropped += outcomes[i].dropped;
      if (outcomes[i].failure) {
        ++s.pairs_skipped;
        spdlog::warn("skipping pair {}: {}", pairs[begin + i].doc_id, *outcomes[i].failure);
        continue;
      }
      for (auto& e : outcomes[i].exemplars) {
        if (const auto id = pools.add(std::move(e))) {
          pos_lines.push_back(positive_line(pools.pair(*id)));
          neg_lines.push_back(negative_line(pools.pair(*id)));
        } else {
          ++s.duplicates;
        }
      }
    }
    append_lines(pos_part, pos_lines);
    append_lines(neg_part, neg_lines);
    s.pairs_processed += batch;
    checkpoint();
  }

  if (pools.empty()) {
    throw Error(ErrorCode::EmptyPools, "no exemplars extracted from " + std::to_string(pairs.size()) + " pairs");
  }
  save_pools(pools, dir,
             {{"pairs_fingerprint", pairs_fingerprint},
              {"pairs_processed", s.pairs_processed},
              {"pairs_skipped", s.pairs_skipped},
              {"issues_dropped", s.issues_dropped},
              {"duplicates", s.duplicates}});
  std::filesystem::remove(pos_part);
  std::filesystem::remove(neg_part);
  std::filesystem::remove(progress_path);
  s.finalized = true;
  return s;
}

RegressionModel train_from_pools(const ExperiencePools& pools, const FeatureExtractor& extractor, double lambda,
                                 std::size_t k, const TrainOptions& options, std::size_t workers) {
  if (pools.empty()) throw Error(ErrorCode::EmptyPools, "cannot train on empty pools");
  const auto m = pools.size();
  std::vector<FeatureVector> raw(2 * m);
  parallel_for(2 * m, workers, [&](std::size_t i) {
    const auto& pair = pools.pair(i / 2);
    raw[i] = extractor.extract(i % 2 == 0 ? pair.positive : pair.negative);
  });
  const auto params = fit_normalization(raw);
  std::vector<LabeledExample> examples;
  examples.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    examples.push_back(LabeledExample{normalize(raw[i], params), i % 2 == 0 ? 1 : 0});
  }
  auto model = train(examples, lambda, options);
  model.normalization = params;
  model.feature_ids = extractor.catalog().ids();
  model.pools_fingerprint = pools.fingerprint();
  return select_top_k(std::move(model), k);
}

}  // namespace legalstyle
