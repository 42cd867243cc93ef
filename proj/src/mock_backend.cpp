#include "legalstyle/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/dimensions.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/hashing.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

struct Pattern {
  std::u32string from;
  std::vector<std::string> to;
  std::string formal;
};

// Longest-match substitution over code points; `choose` picks the
// replacement for the match at a code-point position.
template <typename Choose>
std::string substitute(std::string_view text, const std::vector<Pattern>& patterns, Choose&& choose) {
  const auto cps = utf8::decode(text);
  std::string out;
  std::size_t i = 0;
  while (i < cps.size()) {
    const Pattern* best = nullptr;
    for (const auto& p : patterns) {
      if (p.from.size() > cps.size() - i) continue;
      if (std::u32string_view(cps).substr(i, p.from.size()) != p.from) continue;
      if (best == nullptr || p.from.size() > best->from.size()) best = &p;
    }
    if (best == nullptr) {
      out += utf8::encode(cps[i]);
      ++i;
      continue;
    }
    out += choose(*best, i);
    i += best->from.size();
  }
  return out;
}

std::vector<std::string> sentences_of(std::string_view text) {
  const auto cps = utf8::decode(text);
  std::vector<std::string> out;
  std::u32string cur;
  for (char32_t cp : cps) {
    cur.push_back(cp);
    if (cp == U'。' || cp == U'！' || cp == U'？' || cp == U'；') {
      auto s = utf8::trim(utf8::encode(cur));
      if (!s.empty()) out.push_back(std::move(s));
      cur.clear();
    }
  }
  auto tail = utf8::trim(utf8::encode(cur));
  if (!tail.empty()) out.push_back(std::move(tail));
  return out;
}

std::string payload(const ChatRequest& request, const std::string& key) {
  const auto it = request.payload.find(key);
  return it == request.payload.end() ? std::string() : it->second;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", score);
  return buf;
}

}  // namespace

MockOptions MockOptions::from_file(const std::filesystem::path& style_map) {
  const auto j = nlohmann::json::parse(read_file(style_map));
  MockOptions opts;
  for (const auto& e : j.at("entries")) {
    opts.style_map.push_back(StyleSubstitution{e.at("formal").get<std::string>(), e.at("colloquial").get<std::string>(),
                                               e.at("restored").get<std::vector<std::string>>()});
  }
  return opts;
}

MockOptions MockOptions::shipped() { return from_file(default_data_dir() / "mock" / "style_map.json"); }

MockBackend::MockBackend(std::uint64_t seed, MockOptions options) : seed_(seed), options_(std::move(options)) {
  if (options_.embedding_dim == 0) throw Error(ErrorCode::Config, "mock embedding dimension must be positive");
}

std::uint64_t MockBackend::hash(std::string_view a, std::string_view b) const {
  return mix64(fnv1a64(b, fnv1a64(a, seed_)));
}

std::string MockBackend::embedder_id() const {
  return "mock-hash-embed/" + std::to_string(options_.embedding_dim) + "@seed" + std::to_string(seed_);
}

std::string MockBackend::model_for(ModelRole role) const { return "mock-" + std::string(to_string(role)); }

std::string MockBackend::colloquialize(std::string_view text) const {
  std::vector<Pattern> patterns;
  for (const auto& s : options_.style_map) {
    patterns.push_back(Pattern{utf8::decode(s.formal), {s.colloquial}, s.formal});
  }
  return substitute(text, patterns, [](const Pattern& p, std::size_t) { return p.to.front(); });
}

std::string MockBackend::restore(std::string_view text, std::string_view salt, double formal_rate) const {
  // Single-character colloquial forms are left alone: they occur inside
  // unrelated words far too often.
  std::vector<Pattern> patterns;
  for (const auto& s : options_.style_map) {
    auto from = utf8::decode(s.colloquial);
    if (from.size() < 2) continue;
    const bool seen = std::any_of(patterns.begin(), patterns.end(), [&](const Pattern& p) { return p.from == from; });
    if (!seen) patterns.push_back(Pattern{std::move(from), s.restored, s.formal});
  }
  const std::uint64_t base = hash(salt, text);
  return substitute(text, patterns, [&](const Pattern& p, std::size_t pos) {
    const std::uint64_t h = mix64(base ^ mix64(pos + 1));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    if (u < formal_rate) return p.formal;
    return p.to[(h >> 7) % p.to.size()];
  });
}

std::string MockBackend::identify(const ChatRequest& request) const {
  const auto gold = sentences_of(payload(request, "gold"));
  const auto restored = sentences_of(payload(request, "restored"));
  std::vector<std::size_t> differing;
  for (std::size_t i = 0; i < std::min(gold.size(), restored.size()); ++i) {
    if (gold[i] != restored[i]) differing.push_back(i);
  }
  const std::uint64_t h = hash("identify", request.user_prompt);
  std::stable_sort(differing.begin(), differing.end(),
                   [&](std::size_t a, std::size_t b) { return mix64(h ^ a) < mix64(h ^ b); });
  if (differing.size() > options_.issues_per_pair) differing.resize(options_.issues_per_pair);
  std::sort(differing.begin(), differing.end());

  nlohmann::json issues = nlohmann::json::array();
  for (std::size_t i : differing) {
    const Dimension dim = kDimensions[mix64(h + i) % kDimensions.size()];
    issues.push_back({{"dimension", std::string(to_string(dim))},
                      {"description", std::string(display_name(dim)) + "方面：修复文本用语不够规范，应参照原文的法言法语表述。"},
                      {"gold_span", gold[i]},
                      {"restored_span", restored[i]}});
  }
  return nlohmann::json{{"issues", issues}}.dump();
}

std::string MockBackend::analyze(const ChatRequest& request) const {
  static const std::vector<std::string> kCanned = {
      "文本在该维度上整体较为规范，但个别表述偏口语化。",
      "文本在该维度上存在措辞不够严谨之处，部分用语与裁判文书惯例不符。",
      "文本在该维度上基本符合要求，少数句子衔接略显生硬。",
  };
  const auto dim = payload(request, "dimension");
  return dim + "：" + kCanned[hash("analyze", request.user_prompt) % kCanned.size()];
}

std::string MockBackend::queries(const ChatRequest& request) const {
  auto sentences = sentences_of(payload(request, "text"));
  if (sentences.empty()) sentences.push_back(payload(request, "text"));
  std::size_t count = 1;
  try {
    count = std::max<std::size_t>(1, std::stoul(payload(request, "count")));
  } catch (const std::exception&) {
    count = 1;
  }
  const std::uint64_t start = hash("queries", request.user_prompt) % sentences.size();
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < count; ++i) list.push_back(sentences[(start + i) % sentences.size()]);
  return nlohmann::json{{"queries", list}}.dump();
}

std::string MockBackend::judge(const ChatRequest& request) const {
  const auto dim = payload(request, "dimension");
  return "1. 逐句审阅文本在" + dim + "方面的表述。\n"
         "2. 对照检索到的正反例，比较用语的规范程度。\n"
         "3. 综合上述分析给出评分。\n"
         "SCORE: " + format_score(options_.judge_score) + "\n"
         "FEEDBACK: " + dim + "方面总体可以接受，建议参照正例进一步规范用语。";
}

std::string MockBackend::complete(const ChatRequest& request) {
  const auto& task = request.task;
  if (task == "degrade") return colloquialize(payload(request, "text"));
  if (task == "restore") return restore(payload(request, "text"), "restore", 0.0);
  if (task == "variant") {
    const auto emphasis = payload(request, "emphasis");
    const double rate = emphasis == "formality" ? options_.formal_restore_rate : 0.0;
    return restore(payload(request, "text"), "variant:" + emphasis, rate);
  }
  if (task == "identify" || task == "identify_repair") return identify(request);
  if (task == "analyze") return analyze(request);
  if (task == "queries" || task == "queries_repair") return queries(request);
  if (task == "judge" || task == "judge_repair") return judge(request);
  return "mock reply " + std::to_string(hash(task, request.user_prompt) % 100000);
}

std::vector<double> MockBackend::embed(std::string_view text) {
  std::u32string cps;
  for (char32_t cp : utf8::decode(text)) {
    if (!utf8::is_space(cp)) cps.push_back(cp);
  }
  std::vector<double> v(options_.embedding_dim, 0.0);
  auto add = [&](std::u32string_view gram) {
    const std::uint64_t h = hash("embed", utf8::encode(gram));
    v[h % v.size()] += ((h >> 32) & 1U) != 0 ? 1.0 : -1.0;
  };
  for (std::size_t i = 0; i < cps.size(); ++i) {
    add(std::u32string_view(cps).substr(i, 1));
    if (i + 1 < cps.size()) add(std::u32string_view(cps).substr(i, 2));
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm == 0.0) {
    v[hash("embed-fallback", text) % v.size()] = 1.0;
    return v;
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace legalstyle
