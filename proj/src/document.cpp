#include "legalstyle/document.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

std::optional<std::size_t> earliest(std::string_view text, const std::vector<std::string>& markers,
                                    std::size_t from) {
  std::optional<std::size_t> best;
  for (const auto& marker : markers) {
    if (marker.empty()) continue;
    const auto pos = text.find(marker, from);
    if (pos != std::string_view::npos && (!best || pos < *best)) best = pos;
  }
  return best;
}

// Byte offset just after the last sentence terminator or line break before
// `pos`, but never before `floor`.
std::size_t sentence_start(std::string_view text, std::size_t pos, std::size_t floor) {
  static const std::vector<std::string_view> kStops = {"。", "！", "？", "；", "\n"};
  std::size_t best = floor;
  for (auto stop : kStops) {
    const auto hit = text.rfind(stop, pos == 0 ? 0 : pos - 1);
    if (hit != std::string_view::npos && hit >= floor && hit < pos) {
      best = std::max(best, hit + stop.size());
    }
  }
  while (best < pos) {
    const auto cps = utf8::decode(text.substr(best, 4));
    if (cps.empty() || !utf8::is_space(cps.front())) break;
    best += utf8::encode(cps.front()).size();
  }
  return best;
}

// Moves `end` left past trailing whitespace, stopping at `begin`.
std::size_t trim_end(std::string_view text, std::size_t begin, std::size_t end) {
  const auto cps = utf8::decode(text.substr(begin, end - begin));
  std::size_t keep = cps.size();
  while (keep > 0 && utf8::is_space(cps[keep - 1])) --keep;
  return begin + utf8::encode(std::u32string_view(cps).substr(0, keep)).size();
}

std::size_t trim_begin(std::string_view text, std::size_t begin, std::size_t end) {
  const auto cps = utf8::decode(text.substr(begin, end - begin));
  std::size_t skip = 0;
  while (skip < cps.size() && utf8::is_space(cps[skip])) ++skip;
  return begin + utf8::encode(std::u32string_view(cps).substr(0, skip)).size();
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key,
                                     const std::vector<std::string>& fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

std::string_view to_string(SectionKind kind) noexcept {
  switch (kind) {
    case SectionKind::Header: return "header";
    case SectionKind::Facts: return "facts";
    case SectionKind::Reasoning: return "reasoning";
    case SectionKind::Judgment: return "judgment";
    case SectionKind::Footer: return "footer";
  }
  return "unknown";
}

SectionMarkers SectionMarkers::defaults() {
  SectionMarkers m;
  m.facts = {"诉讼请求", "向本院提出", "诉称", "起诉称", "经审理查明", "本院查明"};
  m.reasoning = {"本院认为"};
  m.judgment = {"判决如下"};
  m.footer = {"如不服本判决", "审判长", "审判员", "人民陪审员"};
  m.judgment_from_sentence_start = true;
  return m;
}

SectionMarkers SectionMarkers::from_json(const nlohmann::json& j) {
  const auto d = defaults();
  SectionMarkers m;
  m.facts = string_list(j, "facts", d.facts);
  m.reasoning = string_list(j, "reasoning", d.reasoning);
  m.judgment = string_list(j, "judgment", d.judgment);
  m.footer = string_list(j, "footer", d.footer);
  m.judgment_from_sentence_start = j.value("judgment_from_sentence_start", d.judgment_from_sentence_start);
  if (m.reasoning.empty()) throw Error(ErrorCode::Config, "reasoning markers must not be empty");
  return m;
}

Document split_sections(std::string id, std::string doc_text, const SectionMarkers& markers) {
  if (utf8::is_blank(doc_text)) throw Error(ErrorCode::EmptyText, "document '" + id + "' is empty");
  const std::string_view text(doc_text);
  const std::size_t n = text.size();

  const auto reasoning = earliest(text, markers.reasoning, 0);
  if (!reasoning) {
    throw Error(ErrorCode::SectionSplit, "no reasoning marker in document '" + id + "'", doc_text);
  }
  // Facts must precede reasoning; anything after is ignored.
  auto facts = earliest(text.substr(0, *reasoning), markers.facts, 0);

  std::optional<std::size_t> judgment = earliest(text, markers.judgment, *reasoning + 1);
  if (judgment && markers.judgment_from_sentence_start) {
    judgment = sentence_start(text, *judgment, *reasoning + 1);
  }
  const std::size_t after_reasoning = judgment.value_or(*reasoning + 1);
  const auto footer = earliest(text, markers.footer, after_reasoning);

  // Section starts in order; absent optional sections collapse onto the next start.
  std::array<std::size_t, 6> starts{};
  starts[5] = n;
  starts[4] = footer.value_or(n);
  starts[3] = judgment.value_or(starts[4]);
  starts[2] = *reasoning;
  starts[1] = facts ? sentence_start(text, *facts, 0) : starts[2];
  starts[0] = 0;

  Document doc;
  doc.id = std::move(id);
  for (std::size_t s = 0; s < 5; ++s) {
    const auto begin = trim_begin(text, starts[s], starts[s + 1]);
    const auto end = trim_end(text, begin, starts[s + 1]);
    doc.sections[s] = TextSpan{begin, end};
  }
  doc.raw_text = std::move(doc_text);
  return doc;
}

std::vector<CorpusRecord> read_corpus_jsonl(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  std::vector<CorpusRecord> out;
  std::set<std::string> seen;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string::npos) eol = raw.size();
    const std::string_view line(raw.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (utf8::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j["id"].is_string() ||
        !j["text"].is_string()) {
      throw Error(ErrorCode::Format,
                  path.string() + ":" + std::to_string(line_no) + ": expected {\"id\": string, \"text\": string}");
    }
    CorpusRecord rec{j["id"].get<std::string>(), utf8::nfc(j["text"].get<std::string>())};
    if (!seen.insert(rec.id).second) {
      throw Error(ErrorCode::Format, path.string() + ": duplicate document id '" + rec.id + "'");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::string corpus_to_jsonl(const std::vector<CorpusRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += nlohmann::json{{"id", r.id}, {"text", r.text}}.dump();
    out += '\n';
  }
  return out;
}

}  // namespace legalstyle
