#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace legalstyle {

/// Pipeline roles that map onto configured model names.
enum class ModelRole { Degrade, Restore, Variant, Identify, Judge, Embed };

std::string_view to_string(ModelRole role) noexcept;

enum class ResponseFormat { FreeText, Structured };

struct ChatRequest {
  ModelRole role = ModelRole::Judge;
  /// Pipeline step that issued the request ("degrade", "identify", "judge", ...).
  std::string task;
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.0;
  int max_output_tokens = 2048;
  ResponseFormat format = ResponseFormat::FreeText;
  /// Raw inputs the prompt was rendered from. Live backends ignore this; the
  /// mock backend reads it instead of parsing prompts.
  std::map<std::string, std::string> payload;
};

struct EmbeddingVector {
  std::vector<double> values;
  std::string backend_id;

  bool operator==(const EmbeddingVector&) const = default;
};

/// Raised by a backend for failures worth retrying (HTTP 408/429/5xx,
/// connection errors).
class TransientBackendError : public std::runtime_error {
 public:
  TransientBackendError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  [[nodiscard]] int status() const noexcept { return status_; }

 private:
  int status_;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::vector<double> embed(std::string_view text) = 0;
  /// Stable identifier of the embedding space (backend kind plus model).
  [[nodiscard]] virtual std::string embedder_id() const = 0;
  [[nodiscard]] virtual std::string model_for(ModelRole role) const = 0;
  /// True when outputs are a pure function of inputs and seed.
  [[nodiscard]] virtual bool deterministic() const = 0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{8000};

  /// base * 2^retry, capped at max_delay. `retry` is zero-based.
  [[nodiscard]] std::chrono::milliseconds delay(int retry) const noexcept;
};

struct GatewayOptions {
  RetryPolicy retry;
  std::size_t max_in_flight = 4;
  /// Minimum spacing between request starts; zero disables rate limiting.
  std::chrono::milliseconds min_interval{0};
  /// Replaced in tests to avoid real sleeps.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct AuditEntry {
  std::string request_id;
  std::string kind;
  std::string role;
  std::string task;
  std::string model;
  int attempts = 0;
  std::string status;
  std::string response_sha;
};

/// Single entry point to chat and embedding backends. Retries transient
/// failures with exponential backoff, caps concurrent requests and keeps an
/// audit trail. Safe for concurrent use.
class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {});

  /// Throws Error(BackendUnavailable) once retries are exhausted and
  /// Error(Protocol) for malformed replies.
  std::string complete(const ChatRequest& request);
  /// Throws Error(EmptyText) for blank input.
  EmbeddingVector embed(std::string_view text);

  [[nodiscard]] const Backend& backend() const noexcept { return *backend_; }
  [[nodiscard]] std::size_t chat_calls() const noexcept { return chat_calls_.load(); }
  [[nodiscard]] std::size_t embed_calls() const noexcept { return embed_calls_.load(); }

  [[nodiscard]] std::vector<AuditEntry> audit_entries() const;
  /// Writes the audit trail as JSONL, sorted so that concurrent runs produce
  /// identical files.
  void write_audit(const std::filesystem::path& path) const;

 private:
  template <typename Fn>
  auto with_retries(AuditEntry& entry, Fn&& fn) -> decltype(fn());

  void acquire();
  void release();
  void record(AuditEntry entry);

  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;

  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  std::size_t in_flight_ = 0;
  std::chrono::steady_clock::time_point next_start_{};

  mutable std::mutex audit_mutex_;
  std::vector<AuditEntry> audit_;

  std::atomic<std::size_t> chat_calls_{0};
  std::atomic<std::size_t> embed_calls_{0};
  std::size_t embed_dim_ = 0;
  std::mutex dim_mutex_;
};

}  // namespace legalstyle
