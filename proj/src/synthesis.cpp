#include "legalstyle/synthesis.hpp"

#include <algorithm>
#include <optional>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "legalstyle/error.hpp"
#include "legalstyle/hashing.hpp"
#include "legalstyle/jsonl.hpp"
#include "legalstyle/parallel.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

const std::unordered_set<std::string> kProperNounTags = {"nr", "nrfg", "nrt", "ns", "nt", "nz"};

bool is_digit(char32_t cp) { return (cp >= U'0' && cp <= U'9') || (cp >= U'０' && cp <= U'９'); }

bool is_cn_numeral(char32_t cp) {
  static const std::u32string kNumerals = U"〇零一二三四五六七八九十百千万亿两";
  return kNumerals.find(cp) != std::u32string::npos;
}

void add_unique(std::vector<std::string>& out, std::unordered_set<std::string>& seen, std::string s) {
  if (seen.insert(s).second) out.push_back(std::move(s));
}

}  // namespace

std::string_view to_string(Emphasis e) noexcept {
  switch (e) {
    case Emphasis::Efficiency: return "efficiency";
    case Emphasis::Thoroughness: return "thoroughness";
    case Emphasis::Structure: return "structure";
    case Emphasis::Formality: return "formality";
    case Emphasis::Educational: return "educational";
  }
  return "unknown";
}

Emphasis parse_emphasis(std::string_view tag) {
  for (auto e : kEmphases) {
    if (to_string(e) == tag) return e;
  }
  throw Error(ErrorCode::InvalidEmphasis, "unknown emphasis '" + std::string(tag) + "'");
}

EntityExtractor::EntityExtractor(std::shared_ptr<const Segmenter> segmenter) : segmenter_(std::move(segmenter)) {}

std::vector<std::string> EntityExtractor::extract(std::string_view text) const {
  std::vector<std::string> out;
  if (utf8::is_blank(text)) return out;
  const auto cps = utf8::decode(text);
  std::vector<std::pair<std::size_t, std::size_t>> spans;

  for (std::size_t i = 0; i < cps.size();) {
    if (is_digit(cps[i])) {
      std::size_t j = i + 1;
      while (j < cps.size() &&
             (is_digit(cps[j]) || ((cps[j] == U'.' || cps[j] == U',') && j + 1 < cps.size() && is_digit(cps[j + 1])))) {
        ++j;
      }
      spans.emplace_back(i, j);
      i = j;
    } else if (is_cn_numeral(cps[i])) {
      std::size_t j = i + 1;
      while (j < cps.size() && is_cn_numeral(cps[j])) ++j;
      if (j - i >= 2) spans.emplace_back(i, j);
      i = j;
    } else {
      ++i;
    }
  }

  const auto tokens = segmenter_->segment(text).tokens;
  std::optional<std::size_t> run_begin;
  std::size_t run_end = 0;
  auto flush = [&] {
    if (run_begin) spans.emplace_back(*run_begin, run_end);
    run_begin.reset();
  };
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto& t = tokens[k];
    // Anonymized party names: one surname character followed by 某 or 某某.
    if (t.end - t.begin == 1 && utf8::is_han(cps[t.begin]) && cps[t.begin] != U'某' && k + 1 < tokens.size() &&
        tokens[k + 1].begin == t.end && (tokens[k + 1].word == "某" || tokens[k + 1].word == "某某")) {
      flush();
      spans.emplace_back(t.begin, tokens[k + 1].end);
      ++k;
      continue;
    }
    if (kProperNounTags.contains(t.tag)) {
      if (!run_begin || t.begin != run_end) {
        flush();
        run_begin = t.begin;
      }
      run_end = t.end;
    } else {
      flush();
    }
  }
  flush();

  std::stable_sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::unordered_set<std::string> seen;
  for (const auto& [b, e] : spans) add_unique(out, seen, utf8::encode(std::u32string_view(cps).substr(b, e - b)));
  return out;
}

double entity_overlap(const std::vector<std::string>& entities, std::string_view candidate) {
  if (entities.empty()) return 1.0;
  const auto kept = std::count_if(entities.begin(), entities.end(),
                                  [&](const std::string& e) { return candidate.find(e) != std::string_view::npos; });
  return static_cast<double>(kept) / static_cast<double>(entities.size());
}

Synthesizer::Synthesizer(Gateway& gateway, std::shared_ptr<const PromptSet> prompts,
                         std::shared_ptr<const Segmenter> segmenter, SynthesisOptions options)
    : gateway_(gateway), prompts_(std::move(prompts)), entities_(std::move(segmenter)), options_(options) {
  if (options_.max_attempts < 1) throw Error(ErrorCode::Config, "max_attempts must be at least 1");
  if (options_.min_entity_overlap < 0.0 || options_.min_entity_overlap > 1.0) {
    throw Error(ErrorCode::Config, "entity overlap threshold must lie in [0, 1]");
  }
}

Synthesizer::Attempted Synthesizer::rewrite(std::string_view source, ModelRole role, const std::string& task,
                                            const std::string& template_name, std::map<std::string, std::string> vars,
                                            std::map<std::string, std::string> payload, ErrorCode on_reject) const {
  if (utf8::is_blank(source)) throw Error(ErrorCode::EmptyText, task + " input is empty");
  const auto entities = entities_.extract(source);
  vars["text"] = std::string(source);
  payload["text"] = std::string(source);
  const auto prompt = prompts_->render(template_name, vars);
  const auto prompt_sha = sha256_hex(prompt.system + "\x1f" + prompt.user).substr(0, 16);

  double best = -1.0;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    ChatRequest req;
    req.role = role;
    req.task = task;
    req.system_prompt = prompt.system;
    req.user_prompt = prompt.user;
    req.payload = payload;
    req.payload["attempt"] = std::to_string(attempt);
    auto out = utf8::trim(gateway_.complete(req));
    if (out.empty()) continue;
    const double overlap = entity_overlap(entities, out);
    best = std::max(best, overlap);
    if (overlap >= options_.min_entity_overlap) return Attempted{std::move(out), attempt, prompt_sha};
    spdlog::debug("{} attempt {} kept {:.2f} of {} entities", task, attempt, overlap, entities.size());
  }
  throw Error(on_reject, task + " output failed entity preservation after " + std::to_string(options_.max_attempts) +
                             " attempts (best overlap " + std::to_string(best) + ")");
}

nlohmann::json Synthesizer::base_provenance() const {
  return {{"prompt_version", prompts_->version()}, {"backend_deterministic", gateway_.backend().deterministic()}};
}

std::string Synthesizer::degrade(std::string_view gold) const {
  return rewrite(gold, ModelRole::Degrade, "degrade", "degrade", {}, {}, ErrorCode::DegradationRejected).text;
}

std::string Synthesizer::restore(std::string_view reverse) const {
  return rewrite(reverse, ModelRole::Restore, "restore", "restore", {}, {}, ErrorCode::RestorationRejected).text;
}

std::string Synthesizer::restore_variant(std::string_view reverse, Emphasis emphasis) const {
  const auto& instruction = prompts_->emphasis_instruction(to_string(emphasis));
  return rewrite(reverse, ModelRole::Variant, "variant", "restore_variant", {{"emphasis_instruction", instruction}},
                 {{"emphasis", std::string(to_string(emphasis))}}, ErrorCode::RestorationRejected)
      .text;
}

ContrastivePair Synthesizer::make_pair(const Document& doc) const {
  const std::string gold(doc.reasoning());
  auto reverse =
      rewrite(gold, ModelRole::Degrade, "degrade", "degrade", {}, {}, ErrorCode::DegradationRejected);
  auto restored =
      rewrite(reverse.text, ModelRole::Restore, "restore", "restore", {}, {}, ErrorCode::RestorationRejected);
  auto prov = base_provenance();
  prov["degrade"] = {{"model", gateway_.backend().model_for(ModelRole::Degrade)},
                     {"template", "degrade"},
                     {"template_sha", prompts_->template_sha("degrade")},
                     {"attempts", reverse.attempts}};
  prov["restore"] = {{"model", gateway_.backend().model_for(ModelRole::Restore)},
                     {"template", "restore"},
                     {"template_sha", prompts_->template_sha("restore")},
                     {"attempts", restored.attempts}};
  return ContrastivePair{doc.id, gold, std::move(reverse.text), std::move(restored.text), std::move(prov)};
}

SynthesisResult Synthesizer::synthesize_corpus(std::span<const Document> docs, std::size_t n) const {
  if (n > docs.size()) {
    throw Error(ErrorCode::Config,
                "requested " + std::to_string(n) + " documents but only " + std::to_string(docs.size()) + " given");
  }
  std::vector<std::optional<ContrastivePair>> pairs(n);
  std::vector<std::optional<SkipRecord>> skips(n);
  parallel_for(n, options_.workers, [&](std::size_t i) {
    try {
      pairs[i] = make_pair(docs[i]);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::DegradationRejected:
        case ErrorCode::RestorationRejected:
        case ErrorCode::BackendUnavailable:
        case ErrorCode::Protocol:
        case ErrorCode::EmptyText:
          skips[i] = SkipRecord{docs[i].id, std::string(to_string(e.code())), e.what()};
          break;
        default:
          throw;
      }
    }
  });

  SynthesisResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (pairs[i]) result.pairs.push_back(std::move(*pairs[i]));
    if (skips[i]) {
      spdlog::warn("skipping document {}: {}", skips[i]->doc_id, skips[i]->message);
      result.skipped.push_back(std::move(*skips[i]));
    }
  }
  if (n > 0 && result.pairs.empty()) {
    throw Error(ErrorCode::SynthesisFailed, "no contrastive pair survived validation out of " + std::to_string(n) +
                                                " documents");
  }
  return result;
}

std::vector<VariantRecord> Synthesizer::generate_test_variants(const Document& doc) const {
  const std::string gold(doc.reasoning());
  const auto reverse = degrade(gold);
  std::vector<VariantRecord> out;
  for (auto e : kEmphases) {
    const auto tag = std::string(to_string(e));
    const auto& instruction = prompts_->emphasis_instruction(tag);
    auto restored = rewrite(reverse, ModelRole::Variant, "variant", "restore_variant",
                            {{"emphasis_instruction", instruction}}, {{"emphasis", tag}}, ErrorCode::RestorationRejected);
    auto prov = base_provenance();
    prov["model"] = gateway_.backend().model_for(ModelRole::Variant);
    prov["template"] = "restore_variant";
    prov["template_sha"] = prompts_->template_sha("restore_variant");
    prov["emphasis"] = tag;
    prov["emphasis_instruction"] = instruction;
    prov["prompt_sha"] = restored.prompt_sha;
    prov["attempts"] = restored.attempts;
    out.push_back(VariantRecord{doc.id + "#" + tag, doc.id, tag, std::move(restored.text), gold, std::move(prov)});
  }
  return out;
}

std::string pairs_to_jsonl(const std::vector<ContrastivePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += nlohmann::json{{"doc_id", p.doc_id},
                          {"gold", p.gold},
                          {"reverse", p.reverse},
                          {"restored", p.restored},
                          {"provenance", p.provenance}}
               .dump() +
           "\n";
  }
  return out;
}

std::vector<ContrastivePair> read_pairs_jsonl(const std::filesystem::path& path) {
  std::vector<ContrastivePair> out;
  for_each_jsonl(path, [&](const nlohmann::json& j) {
    ContrastivePair p{j.at("doc_id").get<std::string>(), j.at("gold").get<std::string>(),
                      j.at("reverse").get<std::string>(), j.at("restored").get<std::string>(),
                      j.value("provenance", nlohmann::json::object())};
    if (utf8::is_blank(p.gold) || utf8::is_blank(p.reverse) || utf8::is_blank(p.restored)) {
      throw Error(ErrorCode::Format, path.string() + ": pair " + p.doc_id + " has an empty text");
    }
    out.push_back(std::move(p));
  });
  return out;
}

std::string skips_to_jsonl(const std::vector<SkipRecord>& skips) {
  std::string out;
  for (const auto& s : skips) {
    out += nlohmann::json{{"doc_id", s.doc_id}, {"error", s.error}, {"message", s.message}}.dump() + "\n";
  }
  return out;
}

std::string variants_to_jsonl(const std::vector<VariantRecord>& variants) {
  std::string out;
  for (const auto& v : variants) {
    out += nlohmann::json{{"id", v.id},
                          {"doc_id", v.doc_id},
                          {"emphasis", v.emphasis},
                          {"text", v.text},
                          {"reference", v.reference},
                          {"provenance", v.provenance}}
               .dump() +
           "\n";
  }
  return out;
}

std::vector<VariantRecord> read_variants_jsonl(const std::filesystem::path& path) {
  std::vector<VariantRecord> out;
  for_each_jsonl(path, [&](const nlohmann::json& j) {
    out.push_back(VariantRecord{j.at("id").get<std::string>(), j.at("doc_id").get<std::string>(),
                                j.at("emphasis").get<std::string>(), j.at("text").get<std::string>(),
                                j.value("reference", std::string()), j.value("provenance", nlohmann::json::object())});
  });
  return out;
}

}  // namespace legalstyle
