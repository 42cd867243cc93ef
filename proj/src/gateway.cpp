#include "legalstyle/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/hashing.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

std::string_view to_string(ModelRole role) noexcept {
  switch (role) {
    case ModelRole::Degrade: return "degrade";
    case ModelRole::Restore: return "restore";
    case ModelRole::Variant: return "variant";
    case ModelRole::Identify: return "identify";
    case ModelRole::Judge: return "judge";
    case ModelRole::Embed: return "embed";
  }
  return "unknown";
}

std::chrono::milliseconds RetryPolicy::delay(int retry) const noexcept {
  const auto base = base_delay.count();
  const int shift = std::clamp(retry, 0, 30);
  const long long scaled = base << shift;
  return std::chrono::milliseconds(std::min<long long>(scaled, max_delay.count()));
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(std::move(options)) {
  if (!backend_) throw Error(ErrorCode::Config, "gateway requires a backend");
  if (options_.max_in_flight == 0) throw Error(ErrorCode::Config, "max_in_flight must be at least 1");
  if (options_.retry.max_retries < 0) throw Error(ErrorCode::Config, "max_retries must be non-negative");
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

void Gateway::acquire() {
  std::chrono::steady_clock::duration wait{};
  {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [&] { return in_flight_ < options_.max_in_flight; });
    ++in_flight_;
    if (options_.min_interval.count() > 0) {
      const auto now = std::chrono::steady_clock::now();
      const auto start = std::max(now, next_start_);
      next_start_ = start + options_.min_interval;
      wait = start - now;
    }
  }
  if (wait.count() > 0) std::this_thread::sleep_for(wait);
}

void Gateway::release() {
  {
    std::lock_guard lock(slots_mutex_);
    --in_flight_;
  }
  slots_cv_.notify_one();
}

void Gateway::record(AuditEntry entry) {
  spdlog::debug("gateway {} {} request={} attempts={} status={}", entry.kind, entry.task, entry.request_id,
                entry.attempts, entry.status);
  std::lock_guard lock(audit_mutex_);
  audit_.push_back(std::move(entry));
}

template <typename Fn>
auto Gateway::with_retries(AuditEntry& entry, Fn&& fn) -> decltype(fn()) {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.retry.max_retries; ++attempt) {
    entry.attempts = attempt + 1;
    acquire();
    try {
      auto result = fn();
      release();
      return result;
    } catch (const TransientBackendError& e) {
      release();
      last_error = e.what();
      spdlog::warn("gateway {} request={} attempt {} failed transiently (status {}): {}", entry.task,
                   entry.request_id, attempt + 1, e.status(), e.what());
      if (attempt < options_.retry.max_retries) options_.sleep(options_.retry.delay(attempt));
    } catch (const Error& e) {
      release();
      entry.status = std::string(to_string(e.code()));
      record(entry);
      throw;
    } catch (const std::exception& e) {
      release();
      entry.status = "ProtocolError";
      record(entry);
      throw Error(ErrorCode::Protocol, std::string("backend failure: ") + e.what());
    }
  }
  entry.status = "BackendUnavailable";
  record(entry);
  throw Error(ErrorCode::BackendUnavailable, "request " + entry.request_id + " failed after " +
                                                 std::to_string(entry.attempts) + " attempts: " + last_error);
}

std::string Gateway::complete(const ChatRequest& request) {
  if (utf8::is_blank(request.user_prompt) || utf8::is_blank(request.system_prompt)) {
    throw Error(ErrorCode::EmptyText, "chat prompts must not be empty");
  }
  ++chat_calls_;
  AuditEntry entry;
  entry.kind = "chat";
  entry.role = std::string(to_string(request.role));
  entry.task = request.task;
  entry.model = backend_->model_for(request.role);
  entry.request_id = sha256_hex("chat\x1f" + entry.role + "\x1f" + request.task + "\x1f" + request.system_prompt +
                                "\x1f" + request.user_prompt)
                         .substr(0, 16);
  std::string reply = with_retries(entry, [&] { return backend_->complete(request); });
  entry.status = "ok";
  entry.response_sha = sha256_hex(reply).substr(0, 16);
  record(entry);
  return reply;
}

EmbeddingVector Gateway::embed(std::string_view text) {
  if (utf8::is_blank(text)) throw Error(ErrorCode::EmptyText, "cannot embed empty text");
  ++embed_calls_;
  AuditEntry entry;
  entry.kind = "embed";
  entry.role = std::string(to_string(ModelRole::Embed));
  entry.task = "embed";
  entry.model = backend_->model_for(ModelRole::Embed);
  entry.request_id = sha256_hex(std::string("embed\x1f") + std::string(text)).substr(0, 16);
  std::vector<double> values = with_retries(entry, [&] { return backend_->embed(text); });

  auto fail = [&](const std::string& why) {
    entry.status = "ProtocolError";
    record(entry);
    throw Error(ErrorCode::Protocol, why);
  };
  if (values.empty()) fail("backend returned an empty embedding");
  for (double v : values) {
    if (!std::isfinite(v)) fail("backend returned a non-finite embedding value");
  }
  {
    std::lock_guard lock(dim_mutex_);
    if (embed_dim_ == 0) embed_dim_ = values.size();
    if (values.size() != embed_dim_) {
      fail("embedding dimension changed from " + std::to_string(embed_dim_) + " to " + std::to_string(values.size()));
    }
  }
  entry.status = "ok";
  record(entry);
  return EmbeddingVector{std::move(values), backend_->embedder_id()};
}

std::vector<AuditEntry> Gateway::audit_entries() const {
  std::lock_guard lock(audit_mutex_);
  return audit_;
}

void Gateway::write_audit(const std::filesystem::path& path) const {
  std::vector<std::string> lines;
  for (const auto& e : audit_entries()) {
    lines.push_back(nlohmann::json{{"request_id", e.request_id},
                                   {"kind", e.kind},
                                   {"role", e.role},
                                   {"task", e.task},
                                   {"model", e.model},
                                   {"attempts", e.attempts},
                                   {"status", e.status},
                                   {"response_sha", e.response_sha}}
                        .dump());
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  write_file(path, out);
}

}  // namespace legalstyle
