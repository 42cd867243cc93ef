#include "legalstyle/pipeline.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>
#include <optional>

#include <spdlog/spdlog.h>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/document.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/hashing.hpp"
#include "legalstyle/metrics.hpp"
#include "legalstyle/mock_backend.hpp"
#include "legalstyle/openai_backend.hpp"
#include "legalstyle/parallel.hpp"
#include "legalstyle/ratings.hpp"
#include "legalstyle/retrieval.hpp"
#include "legalstyle/scoring.hpp"
#include "legalstyle/synthesis.hpp"

namespace legalstyle {

namespace {

constexpr int kRunManifestSchema = 1;

std::string file_sha(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

template <typename Fn>
std::optional<double> maybe(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UndefinedCorrelation || e.code() == ErrorCode::UndefinedCV ||
        e.code() == ErrorCode::UndefinedAgreement) {
      spdlog::warn("{}", e.what());
      return std::nullopt;
    }
    throw;
  }
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

std::string opt_text(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::vector<Document> split_all(const std::vector<CorpusRecord>& records, std::vector<SkipRecord>& skips) {
  std::vector<Document> docs;
  for (const auto& r : records) {
    try {
      docs.push_back(split_sections(r.id, r.text));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SectionSplit && e.code() != ErrorCode::EmptyText) throw;
      spdlog::warn("skipping document {}: {}", r.id, e.what());
      skips.push_back(SkipRecord{r.id, std::string(to_string(e.code())), e.what()});
    }
  }
  return docs;
}

}  // namespace

RunLock::RunLock(const std::filesystem::path& run_dir) : path_(run_dir / ".lock") {
  std::filesystem::create_directories(run_dir);
  const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw Error(ErrorCode::Locked, "run directory " + run_dir.string() + " is in use (remove " + path_.string() +
                                       " if no other command is running)");
  }
  const auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

RunLock::~RunLock() {
  std::error_code ec;
  std::filesystem::remove(path_, ec);
}

std::shared_ptr<Backend> make_backend(const PipelineConfig& config) {
  if (config.backend == BackendKind::Mock) {
    return std::make_shared<MockBackend>(config.seed, MockOptions::from_file(config.style_map_path()));
  }
  LiveBackendConfig live;
  live.base_url = config.base_url;
  live.api_key_env = config.api_key_env;
  live.models = config.models;
  live.timeout = std::chrono::seconds(config.timeout_seconds);
  return std::make_shared<OpenAiBackend>(live);
}

std::string report_file_name(const std::string& id) {
  std::string out;
  for (char c : id) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                      c == '_' || c == '-';
    out += keep ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

Pipeline::Pipeline(PipelineConfig config, std::filesystem::path run_dir, std::shared_ptr<Backend> backend)
    : config_(std::move(config)), run_dir_(std::move(run_dir)), backend_(std::move(backend)) {
  config_.validate();
}

Gateway& Pipeline::gateway() {
  if (!gateway_) {
    if (!backend_) backend_ = make_backend(config_);
    GatewayOptions opts;
    opts.retry.max_retries = config_.max_retries;
    opts.retry.base_delay = std::chrono::milliseconds(config_.base_delay_ms);
    opts.retry.max_delay = std::chrono::milliseconds(config_.max_delay_ms);
    opts.max_in_flight = config_.max_in_flight;
    opts.min_interval = std::chrono::milliseconds(config_.min_interval_ms);
    gateway_ = std::make_unique<Gateway>(backend_, opts);
  }
  return *gateway_;
}

std::shared_ptr<const Segmenter> Pipeline::segmenter() {
  if (!segmenter_) {
    if (config_.data_dir.empty()) {
      segmenter_ = Segmenter::shipped();
    } else {
      const auto dir = config_.data_dir / "dict";
      segmenter_ = std::make_shared<const Segmenter>(Dictionary::load(dir / "jieba_dict.txt", dir / "tagset.json"));
    }
  }
  return segmenter_;
}

std::shared_ptr<const FeatureCatalog> Pipeline::catalog() {
  if (!catalog_) catalog_ = std::make_shared<const FeatureCatalog>(FeatureCatalog::load(config_.catalog_path()));
  return catalog_;
}

std::shared_ptr<const PromptSet> Pipeline::prompts() {
  if (!prompts_) prompts_ = std::make_shared<const PromptSet>(PromptSet::load(config_.prompts_path()));
  return prompts_;
}

void Pipeline::record_stage(const std::string& stage, nlohmann::json info) {
  const auto path = run_dir_ / "manifest.json";
  nlohmann::json manifest = nlohmann::json::object();
  if (std::filesystem::exists(path)) manifest = nlohmann::json::parse(read_file(path));
  auto& backend = gateway().backend();
  manifest["schema"] = kRunManifestSchema;
  manifest["config_hash"] = config_hash(config_);
  manifest["config"] = to_json(config_);
  manifest["backend"] = {{"kind", std::string(to_string(config_.backend))},
                         {"deterministic", backend.deterministic()},
                         {"embedder_id", backend.embedder_id()}};
  manifest["versions"] = {{"catalog", catalog()->version()},
                          {"prompts", prompts()->version()},
                          {"tagset", segmenter()->dictionary().tagset_version()}};
  manifest["stages"][stage] = std::move(info);
  write_file(path, manifest.dump(2) + "\n");
}

void Pipeline::write_audit(const std::string& stage) { gateway().write_audit(run_dir_ / "audit" / (stage + ".jsonl")); }

SynthStats Pipeline::synth(const std::filesystem::path& corpus, std::optional<std::size_t> n) {
  const auto records = read_corpus_jsonl(corpus);
  std::vector<SkipRecord> skips;
  const auto docs = split_all(records, skips);

  SynthStats stats;
  stats.documents = records.size();
  stats.requested = n.value_or(config_.n);
  if (stats.requested > docs.size()) {
    spdlog::warn("requested {} documents but only {} are usable; using {}", stats.requested, docs.size(), docs.size());
    stats.requested = docs.size();
  }
  if (stats.requested == 0) spdlog::warn("no documents requested; writing an empty pair file");

  Synthesizer synthesizer(gateway(), prompts(), segmenter(),
                          SynthesisOptions{config_.min_entity_overlap, config_.max_attempts, config_.workers});
  SynthesisResult result;
  if (stats.requested > 0) result = synthesizer.synthesize_corpus(std::span(docs).first(stats.requested), stats.requested);
  skips.insert(skips.end(), result.skipped.begin(), result.skipped.end());
  stats.pairs = result.pairs.size();
  stats.skipped = skips.size();

  const auto dir = run_dir_ / "synth";
  write_file(dir / "pairs.jsonl", pairs_to_jsonl(result.pairs));
  write_file(dir / "skips.jsonl", skips_to_jsonl(skips));
  write_audit("synth");
  record_stage("synth", {{"input", corpus.filename().string()},
                         {"input_sha256", file_sha(corpus)},
                         {"documents", stats.documents},
                         {"requested", stats.requested},
                         {"pairs", stats.pairs},
                         {"skipped", stats.skipped},
                         {"pairs_sha256", file_sha(dir / "pairs.jsonl")}});
  return stats;
}

std::size_t Pipeline::variants(const std::filesystem::path& corpus) {
  const auto records = read_corpus_jsonl(corpus);
  std::vector<SkipRecord> skips;
  const auto docs = split_all(records, skips);
  Synthesizer synthesizer(gateway(), prompts(), segmenter(),
                          SynthesisOptions{config_.min_entity_overlap, config_.max_attempts, config_.workers});
  std::vector<std::optional<std::vector<VariantRecord>>> per_doc(docs.size());
  parallel_for(docs.size(), config_.workers, [&](std::size_t i) {
    try {
      per_doc[i] = synthesizer.generate_test_variants(docs[i]);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegradationRejected && e.code() != ErrorCode::RestorationRejected &&
          e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::Protocol) {
        throw;
      }
      spdlog::warn("no variants for {}: {}", docs[i].id, e.what());
    }
  });
  std::vector<VariantRecord> out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!per_doc[i]) continue;
    const std::string gold(docs[i].reasoning());
    out.push_back(VariantRecord{docs[i].id + "#gold", docs[i].id, "gold", gold, gold, nlohmann::json::object()});
    for (auto& v : *per_doc[i]) out.push_back(std::move(v));
  }
  if (out.empty()) throw Error(ErrorCode::SynthesisFailed, "no test variants could be generated");
  const auto path = run_dir_ / "variants" / "variants.jsonl";
  write_file(path, variants_to_jsonl(out));
  write_audit("variants");
  record_stage("variants", {{"input", corpus.filename().string()},
                            {"input_sha256", file_sha(corpus)},
                            {"texts", out.size()},
                            {"variants_sha256", file_sha(path)}});
  return out.size();
}

LearnSummary Pipeline::learn(std::optional<std::size_t> stop_after) {
  const auto pairs = read_pairs_jsonl(run_dir_ / "synth" / "pairs.jsonl");
  if (pairs.empty()) throw Error(ErrorCode::EmptyPools, "the pair file is empty; nothing to learn from");
  LearnOptions opts;
  opts.workers = config_.workers;
  opts.checkpoint_every = config_.checkpoint_every;
  opts.stop_after = stop_after;
  ExperienceLearner learner(gateway(), prompts(), opts);
  const auto summary = learner.build_pools_in(pairs, run_dir_ / "pools");
  write_audit("learn");
  if (summary.finalized) {
    const auto manifest = nlohmann::json::parse(read_file(run_dir_ / "pools" / "manifest.json"));
    record_stage("learn", {{"pairs_processed", summary.pairs_processed},
                           {"pairs_skipped", summary.pairs_skipped},
                           {"issues_dropped", summary.issues_dropped},
                           {"duplicates", summary.duplicates},
                           {"pool_size", manifest.at("count")},
                           {"fingerprint", manifest.at("fingerprint")}});
  }
  return summary;
}

RegressionModel Pipeline::train() {
  const auto pools = load_pools(run_dir_ / "pools");
  const FeatureExtractor extractor(catalog(), segmenter());
  auto model = train_from_pools(pools, extractor, config_.lambda, config_.k, TrainOptions{}, config_.workers);
  const auto path = run_dir_ / "model" / "model.json";
  save_model(path, model);
  record_stage("train", {{"k", model.k()},
                         {"lambda", model.lambda},
                         {"iterations", model.iterations},
                         {"converged", model.converged},
                         {"examples", 2 * pools.size()},
                         {"model_sha256", file_sha(path)}});
  return model;
}

std::size_t Pipeline::score(const std::filesystem::path& texts) {
  const auto records = read_corpus_jsonl(texts);
  const auto model = load_model(run_dir_ / "model" / "model.json");
  const auto pools = load_pools(run_dir_ / "pools");
  const auto index = VectorIndex::build(pools);
  const FeatureExtractor extractor(catalog(), segmenter());
  ScoringOptions opts;
  opts.queries = config_.x;
  opts.retrievals = config_.y;
  opts.weights = config_.dimension_weights;
  opts.fusion = config_.fusion;
  opts.workers = config_.workers;
  const Scorer scorer(gateway(), prompts(), model, pools, index, extractor, opts);

  std::map<std::string, std::string> files;
  for (const auto& r : records) {
    const auto name = report_file_name(r.id) + ".json";
    const auto [it, inserted] = files.emplace(name, r.id);
    if (!inserted) throw Error(ErrorCode::Format, "ids '" + it->second + "' and '" + r.id + "' map to the same report file");
  }

  const auto dir = run_dir_ / "reports";
  std::filesystem::remove_all(dir);
  std::string summary;
  nlohmann::json index_json = nlohmann::json::array();
  for (const auto& r : records) {
    const auto report = scorer.score_document(r.id, r.text);
    const auto name = report_file_name(r.id) + ".json";
    write_file(dir / name, to_json(report, config_.dimension_weights).dump(2) + "\n");
    summary += render_summary(report);
    index_json.push_back({{"id", r.id}, {"file", name}, {"fused", report.fused}});
  }
  write_file(dir / "summary.txt", summary);
  write_audit("score");
  record_stage("score", {{"input", texts.filename().string()},
                         {"input_sha256", file_sha(texts)},
                         {"documents", records.size()},
                         {"reports", index_json}});
  return records.size();
}

nlohmann::json EvalResult::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"name", r.name},
                         {"pearson", opt_json(r.pearson)},
                         {"spearman", opt_json(r.spearman)},
                         {"kendall_tau_b", opt_json(r.kendall)},
                         {"std", opt_json(r.stddev)},
                         {"variance", opt_json(r.variance)},
                         {"cv", opt_json(r.cv)}});
  }
  return {{"documents", documents}, {"rows", rows_json}, {"krippendorff_alpha_interval", opt_json(alpha)}};
}

std::string EvalResult::to_table() const {
  std::string out = "documents: " + std::to_string(documents) + "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s %9s %9s\n", "system", "pearson", "spearman", "kendall",
                "std", "variance", "cv");
  out += line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-12s %9s %9s %9s %9s %9s %9s\n", r.name.c_str(), opt_text(r.pearson).c_str(),
                  opt_text(r.spearman).c_str(), opt_text(r.kendall).c_str(), opt_text(r.stddev).c_str(),
                  opt_text(r.variance).c_str(), opt_text(r.cv).c_str());
    out += line;
  }
  out += "krippendorff alpha (interval): " + opt_text(alpha) + "\n";
  return out;
}

EvalResult Pipeline::eval(const std::filesystem::path& human_csv,
                          const std::optional<std::filesystem::path>& variants_path) {
  const auto ratings = read_ratings_csv(human_csv);
  const auto human = weighted_human_scores(ratings, config_.dimension_weights);

  std::map<std::string, std::map<std::string, double>> system;
  const auto dir = run_dir_ / "reports";
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, "no reports under " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto j = nlohmann::json::parse(read_file(f));
    const auto id = j.at("id").get<std::string>();
    system["subjective"][id] = j.at("subjective").get<double>();
    system["objective"][id] = j.at("objective").get<double>();
    system["fused"][id] = 10.0 * j.at("fused").get<double>();
  }
  if (variants_path) {
    for (const auto& v : read_variants_jsonl(*variants_path)) {
      if (!system["objective"].contains(v.id) || v.reference.empty()) continue;
      system["char-f1"][v.id] = 10.0 * char_f1(v.text, v.reference);
    }
  }

  EvalResult result;
  for (const char* name : {"subjective", "objective", "fused", "char-f1"}) {
    if (!system.contains(name)) continue;
    const auto paired = align_scores(system[name], human);
    result.documents = paired.ids.size();
    EvalRow row;
    row.name = name;
    row.pearson = maybe([&] { return pearson(paired.system, paired.human); });
    row.spearman = maybe([&] { return spearman(paired.system, paired.human); });
    row.kendall = maybe([&] { return kendall_tau_b(paired.system, paired.human); });
    const auto d = dispersion(paired.system);
    row.stddev = d.stddev;
    row.variance = d.variance;
    row.cv = maybe([&] { return dispersion(paired.system).cv; });
    result.rows.push_back(std::move(row));
  }
  {
    std::vector<double> h;
    for (const auto& [_, s] : human) h.push_back(s);
    EvalRow row;
    row.name = "human";
    const auto d = dispersion(h);
    row.stddev = d.stddev;
    row.variance = d.variance;
    row.cv = d.cv;
    result.rows.push_back(std::move(row));
  }
  result.alpha = maybe([&] { return krippendorff_alpha_interval(annotation_matrix(ratings, config_.dimension_weights)); });

  const auto out = run_dir_ / "eval";
  write_file(out / "metrics.json", result.to_json().dump(2) + "\n");
  write_file(out / "metrics.txt", result.to_table());
  record_stage("eval", {{"human_sha256", file_sha(human_csv)},
                        {"documents", result.documents},
                        {"metrics_sha256", file_sha(out / "metrics.json")}});
  return result;
}

}  // namespace legalstyle
