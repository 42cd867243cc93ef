#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "legalstyle/config.hpp"
#include "legalstyle/experience.hpp"
#include "legalstyle/features.hpp"
#include "legalstyle/gateway.hpp"
#include "legalstyle/prompts.hpp"
#include "legalstyle/regression.hpp"
#include "legalstyle/segmenter.hpp"

namespace legalstyle {

/// Exclusive claim on a run directory, released on destruction. Throws
/// Error(Locked) when another process holds it.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  std::filesystem::path path_;
};

struct SynthStats {
  std::size_t documents = 0;
  std::size_t requested = 0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;
};

struct EvalRow {
  std::string name;
  std::optional<double> pearson;
  std::optional<double> spearman;
  std::optional<double> kendall;
  std::optional<double> stddev;
  std::optional<double> variance;
  std::optional<double> cv;
};

struct EvalResult {
  std::size_t documents = 0;
  std::vector<EvalRow> rows;
  std::optional<double> alpha;
  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// The stages of a run, each reading and writing files under one run
/// directory:
///   synth/pairs.jsonl, synth/skips.jsonl
///   variants/variants.jsonl
///   pools/{positives,negatives}.jsonl, pools/manifest.json
///   model/model.json
///   reports/<id>.json, reports/summary.txt
///   eval/metrics.json, eval/metrics.txt
///   audit/<stage>.jsonl
///   manifest.json
class Pipeline {
 public:
  /// `backend` overrides the backend named in the configuration.
  Pipeline(PipelineConfig config, std::filesystem::path run_dir, std::shared_ptr<Backend> backend = nullptr);

  /// Splits every document, then synthesizes pairs for the first n (the
  /// configured N when unset, clamped to the corpus size).
  SynthStats synth(const std::filesystem::path& corpus, std::optional<std::size_t> n = std::nullopt);
  /// Gold reasoning plus one restoration per emphasis for every document.
  std::size_t variants(const std::filesystem::path& corpus);
  LearnSummary learn(std::optional<std::size_t> stop_after = std::nullopt);
  RegressionModel train();
  std::size_t score(const std::filesystem::path& texts);
  EvalResult eval(const std::filesystem::path& human_csv, const std::optional<std::filesystem::path>& variants);

  [[nodiscard]] const std::filesystem::path& run_dir() const noexcept { return run_dir_; }
  [[nodiscard]] const PipelineConfig& config() const noexcept { return config_; }
  [[nodiscard]] Gateway& gateway();
  [[nodiscard]] std::shared_ptr<const Segmenter> segmenter();
  [[nodiscard]] std::shared_ptr<const FeatureCatalog> catalog();
  [[nodiscard]] std::shared_ptr<const PromptSet> prompts();

 private:
  void record_stage(const std::string& stage, nlohmann::json info);
  void write_audit(const std::string& stage);

  PipelineConfig config_;
  std::filesystem::path run_dir_;
  std::shared_ptr<Backend> backend_;
  std::unique_ptr<Gateway> gateway_;
  std::shared_ptr<const Segmenter> segmenter_;
  std::shared_ptr<const FeatureCatalog> catalog_;
  std::shared_ptr<const PromptSet> prompts_;
};

/// Builds the backend named in the configuration.
std::shared_ptr<Backend> make_backend(const PipelineConfig& config);

/// File name for a report id: characters outside [A-Za-z0-9._-] become '_'.
std::string report_file_name(const std::string& id);

}  // namespace legalstyle
