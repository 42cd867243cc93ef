#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "legalstyle/gateway.hpp"

namespace legalstyle::test_support {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "legalstyle-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Backend driven by callbacks, for failure injection and call counting.
class ScriptedBackend final : public Backend {
 public:
  std::function<std::string(const ChatRequest&, int)> on_complete = [](const ChatRequest&, int) {
    return std::string("ok");
  };
  std::function<std::vector<double>(std::string_view, int)> on_embed = [](std::string_view, int) {
    return std::vector<double>{1.0, 0.0};
  };
  std::string embedder = "scripted-embed";
  std::atomic<int> complete_calls{0};
  std::atomic<int> embed_calls{0};

  std::string complete(const ChatRequest& request) override { return on_complete(request, complete_calls++); }
  std::vector<double> embed(std::string_view text) override { return on_embed(text, embed_calls++); }
  [[nodiscard]] std::string embedder_id() const override { return embedder; }
  [[nodiscard]] std::string model_for(ModelRole role) const override { return "scripted-" + std::string(to_string(role)); }
  [[nodiscard]] bool deterministic() const override { return true; }
};

inline GatewayOptions no_sleep_options() {
  GatewayOptions opts;
  opts.sleep = [](std::chrono::milliseconds) {};
  return opts;
}

}  // namespace legalstyle::test_support
