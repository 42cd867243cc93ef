#include "legalstyle/config.hpp"

#include <cmath>
#include <set>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/hashing.hpp"

namespace legalstyle {

namespace {

constexpr std::size_t kMaxK = 100;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::Config, what);
}

void reject_unknown(const nlohmann::json& j, const std::string& where, const std::set<std::string>& allowed) {
  require(j.is_object(), where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    require(allowed.contains(key), "unknown configuration key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const nlohmann::json& j, const char* key, std::filesystem::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

std::optional<ModelRole> parse_role(std::string_view name) {
  for (auto r : {ModelRole::Degrade, ModelRole::Restore, ModelRole::Variant, ModelRole::Identify, ModelRole::Judge,
                 ModelRole::Embed}) {
    if (to_string(r) == name) return r;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(BackendKind kind) noexcept { return kind == BackendKind::Mock ? "mock" : "live"; }

BackendKind parse_backend_kind(std::string_view name) {
  if (name == "mock") return BackendKind::Mock;
  if (name == "live") return BackendKind::Live;
  throw Error(ErrorCode::Config, "backend must be 'mock' or 'live', got '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
  require(n >= 1, "n must be at least 1");
  require(k >= 1 && k <= kMaxK, "k must lie in [1, " + std::to_string(kMaxK) + "], got " + std::to_string(k));
  require(x >= 1, "x (query count) must be at least 1");
  require(y >= 1, "y (retrieval count) must be at least 1");
  require(std::isfinite(lambda) && lambda > 0.0, "lambda must be a positive finite number");
  require(fusion.objective >= 0.0 && fusion.subjective >= 0.0, "fusion weights must be non-negative");
  require(std::abs(fusion.objective + fusion.subjective - 1.0) <= 1e-12, "fusion weights must sum to 1");
  require(max_retries >= 0, "max_retries must be non-negative");
  require(base_delay_ms >= 0 && max_delay_ms >= base_delay_ms, "retry delays must satisfy 0 <= base <= max");
  require(max_in_flight >= 1, "max_in_flight must be at least 1");
  require(min_interval_ms >= 0, "min_interval_ms must be non-negative");
  require(timeout_seconds > 0, "timeout_seconds must be positive");
  require(min_entity_overlap >= 0.0 && min_entity_overlap <= 1.0, "min_entity_overlap must lie in [0, 1]");
  require(max_attempts >= 1, "max_attempts must be at least 1");
  require(workers >= 1, "workers must be at least 1");
  require(checkpoint_every >= 1, "checkpoint_every must be at least 1");
  for (auto r : {ModelRole::Degrade, ModelRole::Restore, ModelRole::Variant, ModelRole::Identify, ModelRole::Judge,
                 ModelRole::Embed}) {
    const auto it = models.find(r);
    require(it != models.end() && !it->second.empty(), "no model configured for role " + std::string(to_string(r)));
  }
  if (backend == BackendKind::Live) require(!base_url.empty(), "live backend needs a base_url");
}

std::filesystem::path PipelineConfig::resolved_data_dir() const {
  return data_dir.empty() ? default_data_dir() : data_dir;
}

std::filesystem::path PipelineConfig::catalog_path() const {
  return catalog.empty() ? resolved_data_dir() / "catalog" / "default_catalog.json" : catalog;
}

std::filesystem::path PipelineConfig::prompts_path() const {
  return prompts.empty() ? resolved_data_dir() / "prompts" / "prompts.json" : prompts;
}

std::filesystem::path PipelineConfig::style_map_path() const {
  return mock_style_map.empty() ? resolved_data_dir() / "mock" / "style_map.json" : mock_style_map;
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [role, name] : c.models) models[std::string(to_string(role))] = name;
  nlohmann::json dims = nlohmann::json::object();
  for (auto d : kDimensions) dims[std::string(to_string(d))] = c.dimension_weights.weight(d);
  return {
      {"backend", std::string(to_string(c.backend))},
      {"seed", c.seed},
      {"live", {{"base_url", c.base_url}, {"api_key_env", c.api_key_env}, {"timeout_seconds", c.timeout_seconds}}},
      {"models", models},
      {"gateway",
       {{"max_retries", c.max_retries},
        {"base_delay_ms", c.base_delay_ms},
        {"max_delay_ms", c.max_delay_ms},
        {"max_in_flight", c.max_in_flight},
        {"min_interval_ms", c.min_interval_ms}}},
      {"synthesis", {{"n", c.n}, {"min_entity_overlap", c.min_entity_overlap}, {"max_attempts", c.max_attempts}}},
      {"learning", {{"checkpoint_every", c.checkpoint_every}}},
      {"regression", {{"lambda", c.lambda}, {"k", c.k}}},
      {"scoring",
       {{"x", c.x},
        {"y", c.y},
        {"fusion", {{"objective", c.fusion.objective}, {"subjective", c.fusion.subjective}}},
        {"dimension_weights", dims}}},
      {"workers", c.workers},
      {"paths",
       {{"data_dir", c.data_dir.string()},
        {"catalog", c.catalog.string()},
        {"prompts", c.prompts.string()},
        {"mock_style_map", c.mock_style_map.string()}}},
  };
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    reject_unknown(j, "config",
                   {"backend", "seed", "live", "models", "gateway", "synthesis", "learning", "regression", "scoring",
                    "workers", "paths"});
    if (j.contains("backend")) c.backend = parse_backend_kind(j.at("backend").get<std::string>());
    read(j, "seed", c.seed);
    read(j, "workers", c.workers);
    if (j.contains("live")) {
      const auto& s = j.at("live");
      reject_unknown(s, "live", {"base_url", "api_key_env", "timeout_seconds"});
      read(s, "base_url", c.base_url);
      read(s, "api_key_env", c.api_key_env);
      read(s, "timeout_seconds", c.timeout_seconds);
    }
    if (j.contains("models")) {
      const auto& s = j.at("models");
      require(s.is_object(), "models must be an object");
      for (const auto& [key, value] : s.items()) {
        const auto role = parse_role(key);
        require(role.has_value(), "unknown model role '" + key + "'");
        c.models[*role] = value.get<std::string>();
      }
    }
    if (j.contains("gateway")) {
      const auto& s = j.at("gateway");
      reject_unknown(s, "gateway", {"max_retries", "base_delay_ms", "max_delay_ms", "max_in_flight", "min_interval_ms"});
      read(s, "max_retries", c.max_retries);
      read(s, "base_delay_ms", c.base_delay_ms);
      read(s, "max_delay_ms", c.max_delay_ms);
      read(s, "max_in_flight", c.max_in_flight);
      read(s, "min_interval_ms", c.min_interval_ms);
    }
    if (j.contains("synthesis")) {
      const auto& s = j.at("synthesis");
      reject_unknown(s, "synthesis", {"n", "min_entity_overlap", "max_attempts"});
      read(s, "n", c.n);
      read(s, "min_entity_overlap", c.min_entity_overlap);
      read(s, "max_attempts", c.max_attempts);
    }
    if (j.contains("learning")) {
      const auto& s = j.at("learning");
      reject_unknown(s, "learning", {"checkpoint_every"});
      read(s, "checkpoint_every", c.checkpoint_every);
    }
    if (j.contains("regression")) {
      const auto& s = j.at("regression");
      reject_unknown(s, "regression", {"lambda", "k"});
      read(s, "lambda", c.lambda);
      read(s, "k", c.k);
    }
    if (j.contains("scoring")) {
      const auto& s = j.at("scoring");
      reject_unknown(s, "scoring", {"x", "y", "fusion", "dimension_weights"});
      read(s, "x", c.x);
      read(s, "y", c.y);
      if (s.contains("fusion")) {
        const auto& f = s.at("fusion");
        reject_unknown(f, "scoring.fusion", {"objective", "subjective"});
        read(f, "objective", c.fusion.objective);
        read(f, "subjective", c.fusion.subjective);
      }
      if (s.contains("dimension_weights")) {
        const auto& w = s.at("dimension_weights");
        require(w.is_object(), "dimension_weights must be an object");
        std::array<double, 7> values{};
        std::array<bool, 7> seen{};
        for (const auto& [key, value] : w.items()) {
          const auto d = parse_dimension(key);
          require(d.has_value(), "unknown dimension '" + key + "'");
          values[static_cast<std::size_t>(*d)] = value.get<double>();
          seen[static_cast<std::size_t>(*d)] = true;
        }
        for (auto d : kDimensions) {
          require(seen[static_cast<std::size_t>(d)], "dimension_weights lacks '" + std::string(to_string(d)) + "'");
        }
        c.dimension_weights = DimensionWeights::from_decimal(values);
      }
    }
    if (j.contains("paths")) {
      const auto& s = j.at("paths");
      reject_unknown(s, "paths", {"data_dir", "catalog", "prompts", "mock_style_map"});
      read_path(s, "data_dir", c.data_dir);
      read_path(s, "catalog", c.catalog);
      read_path(s, "prompts", c.prompts);
      read_path(s, "mock_style_map", c.mock_style_map);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed configuration: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const PipelineConfig& config) { return sha256_hex(to_json(config).dump()); }

}  // namespace legalstyle
