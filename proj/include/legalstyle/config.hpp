#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "legalstyle/dimensions.hpp"
#include "legalstyle/gateway.hpp"
#include "legalstyle/scoring.hpp"

namespace legalstyle {

enum class BackendKind { Mock, Live };

std::string_view to_string(BackendKind kind) noexcept;
BackendKind parse_backend_kind(std::string_view name);

struct PipelineConfig {
  BackendKind backend = BackendKind::Mock;
  std::uint64_t seed = 42;

  std::string base_url = "http://localhost:8000/v1";
  std::string api_key_env = "LEGALSTYLE_API_KEY";
  int timeout_seconds = 120;
  std::map<ModelRole, std::string> models = {
      {ModelRole::Degrade, "Qwen2.5-7B-Instruct"},   {ModelRole::Restore, "Qwen2.5-32B-Instruct"},
      {ModelRole::Variant, "gpt-4o"},                {ModelRole::Identify, "Qwen2.5-72B-Instruct"},
      {ModelRole::Judge, "Qwen2.5-72B-Instruct"},    {ModelRole::Embed, "Qwen2.5-7B-Instruct"},
  };

  int max_retries = 3;
  int base_delay_ms = 500;
  int max_delay_ms = 8000;
  std::size_t max_in_flight = 4;
  int min_interval_ms = 0;

  std::size_t n = 4000;
  std::size_t x = 10;
  std::size_t y = 10;
  std::size_t k = 25;
  double lambda = 1.0;
  FusionWeights fusion;
  DimensionWeights dimension_weights = DimensionWeights::defaults();

  double min_entity_overlap = 0.9;
  int max_attempts = 3;
  std::size_t workers = 4;
  std::size_t checkpoint_every = 16;

  /// Empty paths fall back to the shipped data directory.
  std::filesystem::path data_dir;
  std::filesystem::path catalog;
  std::filesystem::path prompts;
  std::filesystem::path mock_style_map;

  /// Throws Error(Config) naming the first violated constraint.
  void validate() const;

  [[nodiscard]] std::filesystem::path resolved_data_dir() const;
  [[nodiscard]] std::filesystem::path catalog_path() const;
  [[nodiscard]] std::filesystem::path prompts_path() const;
  [[nodiscard]] std::filesystem::path style_map_path() const;
};

nlohmann::json to_json(const PipelineConfig& config);
/// Unknown keys are rejected. Missing keys keep their defaults. The result
/// is validated.
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& path);
/// SHA-256 of the canonical JSON form.
std::string config_hash(const PipelineConfig& config);

}  // namespace legalstyle
