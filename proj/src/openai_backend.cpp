#include "legalstyle/openai_backend.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "legalstyle/error.hpp"

namespace legalstyle {

namespace {

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(const std::string& base_url, std::chrono::seconds timeout) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw Error(ErrorCode::Config, "base URL needs a scheme: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    const std::string origin = path_start == std::string::npos ? base_url : base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? std::string() : base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    client_ = std::make_unique<httplib::Client>(origin);
    if (!client_->is_valid()) throw Error(ErrorCode::Config, "unsupported base URL: " + base_url);
    client_->set_connection_timeout(timeout);
    client_->set_read_timeout(timeout);
    client_->set_write_timeout(timeout);
  }

  HttpResponse post(const std::string& path, const std::string& body,
                    const std::map<std::string, std::string>& headers) override {
    httplib::Headers h(headers.begin(), headers.end());
    auto res = client_->Post(prefix_ + path, h, body, "application/json");
    if (!res) throw TransientBackendError(0, "connection failed: " + httplib::to_string(res.error()));
    return HttpResponse{res->status, res->body};
  }

 private:
  std::unique_ptr<httplib::Client> client_;
  std::string prefix_;
};

bool is_transient(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(const std::string& base_url, std::chrono::seconds timeout) {
  return std::make_shared<HttplibTransport>(base_url, timeout);
}

OpenAiBackend::OpenAiBackend(LiveBackendConfig config, std::shared_ptr<HttpTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) transport_ = make_http_transport(config_.base_url, config_.timeout);
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

std::string OpenAiBackend::model_for(ModelRole role) const {
  const auto it = config_.models.find(role);
  if (it == config_.models.end() || it->second.empty()) {
    throw Error(ErrorCode::Config, "no model configured for role " + std::string(to_string(role)));
  }
  return it->second;
}

std::string OpenAiBackend::embedder_id() const { return "openai-compatible/" + model_for(ModelRole::Embed); }

std::string OpenAiBackend::post_json(const std::string& path, const std::string& body) {
  std::map<std::string, std::string> headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  const auto res = transport_->post(path, body, headers);
  if (is_transient(res.status)) {
    throw TransientBackendError(res.status, "HTTP " + std::to_string(res.status) + " from " + path);
  }
  if (res.status < 200 || res.status >= 300) {
    throw Error(ErrorCode::BackendUnavailable, "HTTP " + std::to_string(res.status) + " from " + path, res.body);
  }
  return res.body;
}

std::string OpenAiBackend::complete(const ChatRequest& request) {
  nlohmann::json body{
      {"model", model_for(request.role)},
      {"messages",
       {{{"role", "system"}, {"content", request.system_prompt}}, {{"role", "user"}, {"content", request.user_prompt}}}},
      {"temperature", request.temperature},
      {"max_tokens", request.max_output_tokens},
  };
  if (request.format == ResponseFormat::Structured) body["response_format"] = {{"type", "json_object"}};
  const auto reply = post_json("/chat/completions", body.dump());
  try {
    const auto j = nlohmann::json::parse(reply);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorCode::Protocol, "chat reply content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Protocol, std::string("malformed chat reply: ") + e.what(), reply);
  }
}

std::vector<double> OpenAiBackend::embed(std::string_view text) {
  const nlohmann::json body{{"model", model_for(ModelRole::Embed)}, {"input", std::string(text)}};
  const auto reply = post_json("/embeddings", body.dump());
  try {
    const auto j = nlohmann::json::parse(reply);
    return j.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Protocol, std::string("malformed embedding reply: ") + e.what(), reply);
  }
}

}  // namespace legalstyle
