#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

#include "legalstyle/gateway.hpp"

namespace legalstyle {

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Minimal POST-only transport so the live backend can be tested without a
/// network. Throws TransientBackendError for connection failures.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& path, const std::string& body,
                            const std::map<std::string, std::string>& headers) = 0;
};

/// Transport over cpp-httplib. `base_url` is scheme://host[:port][/prefix].
std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url, std::chrono::seconds timeout);

struct LiveBackendConfig {
  std::string base_url = "http://localhost:8000/v1";
  /// Name of the environment variable holding the API key; may be unset for
  /// local servers.
  std::string api_key_env = "LEGALSTYLE_API_KEY";
  std::map<ModelRole, std::string> models;
  std::chrono::seconds timeout{120};
};

/// Client for OpenAI-compatible /chat/completions and /embeddings endpoints.
class OpenAiBackend final : public Backend {
 public:
  explicit OpenAiBackend(LiveBackendConfig config, std::shared_ptr<HttpTransport> transport = nullptr);

  std::string complete(const ChatRequest& request) override;
  std::vector<double> embed(std::string_view text) override;
  [[nodiscard]] std::string embedder_id() const override;
  [[nodiscard]] std::string model_for(ModelRole role) const override;
  [[nodiscard]] bool deterministic() const override { return false; }

 private:
  std::string post_json(const std::string& path, const std::string& body);

  LiveBackendConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::string api_key_;
};

}  // namespace legalstyle
