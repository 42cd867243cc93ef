#include "legalstyle/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

const std::map<std::string, FeatureKind, std::less<>> kKinds = {
    {"log_count", FeatureKind::LogCount},
    {"char_class_ratio", FeatureKind::CharClassRatio},
    {"fullwidth_punct_share", FeatureKind::FullwidthPunctShare},
    {"distinct_han_ratio", FeatureKind::DistinctHanRatio},
    {"char_tier_ratio", FeatureKind::CharTierRatio},
    {"unranked_han_ratio", FeatureKind::UnrankedHanRatio},
    {"char_log_rank", FeatureKind::CharLogRank},
    {"multichar_word_han_share", FeatureKind::MultiCharWordHanShare},
    {"type_token_ratio", FeatureKind::TypeTokenRatio},
    {"hapax_ratio", FeatureKind::HapaxRatio},
    {"mean_word_length", FeatureKind::MeanWordLength},
    {"word_length_ratio", FeatureKind::WordLengthRatio},
    {"pos_ratio", FeatureKind::PosRatio},
    {"pos_pair_ratio", FeatureKind::PosPairRatio},
    {"sentence_length", FeatureKind::SentenceLength},
    {"clauses_per_sentence", FeatureKind::ClausesPerSentence},
    {"clause_length", FeatureKind::ClauseLength},
    {"sentence_length_share", FeatureKind::SentenceLengthShare},
    {"punct_density", FeatureKind::PunctDensity},
    {"lexicon_density", FeatureKind::LexiconDensity},
    {"lexicon_types", FeatureKind::LexiconTypes},
    {"lexicon_count_log", FeatureKind::LexiconCountLog},
    {"law_citation_density", FeatureKind::LawCitationDensity},
    {"four_char_formula_share", FeatureKind::FourCharFormulaShare},
};

bool is_closing_quote(char32_t cp) {
  return cp == U'”' || cp == U'’' || cp == U'」' || cp == U'』' || cp == U'"' || cp == U'\'';
}

bool is_sentence_stop(char32_t cp) { return cp == U'。' || cp == U'！' || cp == U'？' || cp == U'；'; }

bool is_clause_stop(char32_t cp) { return cp == U'，' || cp == U',' || cp == U'：' || cp == U':'; }

bool is_content(char32_t cp) { return !utf8::is_space(cp) && !utf8::is_punct(cp); }

bool is_cn_numeral(char32_t cp) {
  static const std::u32string kNumerals = U"〇零一二三四五六七八九十百千万亿两壹贰叁肆伍陆柒捌玖拾佰仟";
  return kNumerals.find(cp) != std::u32string::npos;
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double stat_of(const std::vector<double>& xs, std::string_view stat) {
  if (xs.empty()) return 0.0;
  if (stat == "max") return *std::max_element(xs.begin(), xs.end());
  if (stat == "min") return *std::min_element(xs.begin(), xs.end());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (stat == "mean") return mean;
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

std::vector<std::string> as_string_list(const nlohmann::json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  return j.get<std::vector<std::string>>();
}

Lexicon load_lexicon(const std::string& name, const std::filesystem::path& path) {
  Lexicon lex;
  lex.name = name;
  const std::string raw = read_file(path);
  std::size_t pos = 0;
  while (pos < raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string::npos) eol = raw.size();
    auto line = utf8::trim(std::string_view(raw).substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    lex.max_chars = std::max(lex.max_chars, utf8::length(line));
    lex.phrases.insert(std::move(line));
  }
  if (lex.phrases.empty()) throw Error(ErrorCode::Format, "lexicon '" + name + "' is empty");
  return lex;
}

// Everything the catalog formulas read, computed once per text.
struct TextProfile {
  std::u32string cps;
  std::size_t nonspace = 0;
  std::map<std::string, std::size_t> char_class;
  std::size_t punct = 0;
  std::size_t fullwidth_punct = 0;
  std::vector<char32_t> han;

  std::vector<const Token*> words;
  std::vector<std::size_t> word_chars;
  std::map<std::string, std::size_t> tag_counts;

  struct Sentence {
    double chars = 0;
    double tokens = 0;
    std::vector<double> clauses;
  };
  std::vector<Sentence> sentences;
};

TextProfile profile(std::string_view text, const TokenizedText& tokenized) {
  TextProfile p;
  p.cps = utf8::decode(text);
  for (char32_t cp : p.cps) {
    if (utf8::is_space(cp)) continue;
    ++p.nonspace;
    if (utf8::is_han(cp)) {
      p.han.push_back(cp);
      ++p.char_class["han"];
    }
    if (cp >= '0' && cp <= '9') ++p.char_class["digit"];
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) ++p.char_class["latin"];
    if (is_cn_numeral(cp)) ++p.char_class["cn_numeral"];
    if (utf8::is_punct(cp)) {
      ++p.punct;
      ++p.char_class["punct"];
      if (utf8::is_fullwidth(cp)) ++p.fullwidth_punct;
    }
  }

  for (const auto& tok : tokenized.tokens) {
    bool has_content = false;
    for (std::size_t i = tok.begin; i < tok.end; ++i) has_content = has_content || is_content(p.cps[i]);
    if (!has_content) continue;
    p.words.push_back(&tok);
    p.word_chars.push_back(tok.end - tok.begin);
    ++p.tag_counts[tok.tag];
  }

  std::size_t wi = 0;
  for (const auto& [b, e] : split_sentences(p.cps)) {
    TextProfile::Sentence s;
    double clause = 0;
    for (std::size_t i = b; i < e; ++i) {
      const char32_t cp = p.cps[i];
      if (is_content(cp)) {
        s.chars += 1;
        clause += 1;
      } else if (is_clause_stop(cp) && clause > 0) {
        s.clauses.push_back(clause);
        clause = 0;
      }
    }
    if (clause > 0) s.clauses.push_back(clause);
    while (wi < p.words.size() && p.words[wi]->begin < e) {
      if (p.words[wi]->begin >= b) s.tokens += 1;
      ++wi;
    }
    if (s.chars > 0) p.sentences.push_back(std::move(s));
  }
  if (p.sentences.empty()) p.sentences.push_back({});
  return p;
}

struct LexiconHits {
  std::size_t count = 0;
  std::set<std::string> types;
};

// Token-aligned matching: a phrase hits when it equals one token or the
// concatenation of consecutive tokens.
void match_lexicon(const Lexicon& lex, const TokenizedText& tokenized, LexiconHits& hits) {
  const auto& toks = tokenized.tokens;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    std::string joined;
    std::size_t chars = 0;
    for (std::size_t j = i; j < toks.size(); ++j) {
      chars += toks[j].end - toks[j].begin;
      if (chars > lex.max_chars) break;
      joined += toks[j].word;
      if (lex.phrases.contains(joined)) {
        ++hits.count;
        hits.types.insert(joined);
      }
    }
  }
}

std::size_t count_law_citations(const std::u32string& cps) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] != U'》') continue;
    std::size_t j = i + 1;
    while (j < cps.size() && utf8::is_space(cps[j])) ++j;
    if (j >= cps.size() || cps[j] != U'第') continue;
    for (std::size_t k = j + 1; k < cps.size() && k <= j + 12; ++k) {
      if (cps[k] == U'条') {
        ++count;
        break;
      }
      if (!is_cn_numeral(cps[k]) && !(cps[k] >= '0' && cps[k] <= '9')) break;
    }
  }
  return count;
}

}  // namespace

std::string_view to_string(FeatureCategory category) noexcept {
  switch (category) {
    case FeatureCategory::CharacterComplexity: return "character-complexity";
    case FeatureCategory::LexicalPos: return "lexical/POS";
    case FeatureCategory::Syntactic: return "syntactic";
    case FeatureCategory::DiscourseMarker: return "discourse-marker";
    case FeatureCategory::Collocation: return "collocation/formulaic";
  }
  return "unknown";
}

FeatureCategory parse_feature_category(std::string_view name) {
  for (auto c : {FeatureCategory::CharacterComplexity, FeatureCategory::LexicalPos, FeatureCategory::Syntactic,
                 FeatureCategory::DiscourseMarker, FeatureCategory::Collocation}) {
    if (to_string(c) == name) return c;
  }
  throw Error(ErrorCode::Format, "unknown feature category '" + std::string(name) + "'");
}

std::vector<std::pair<std::size_t, std::size_t>> split_sentences(std::u32string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_sentence_stop(text[i])) {
      std::size_t end = i + 1;
      while (end < text.size() && is_closing_quote(text[end])) ++end;
      out.emplace_back(start, end);
      start = end;
      i = end;
    } else {
      ++i;
    }
  }
  if (start < text.size()) out.emplace_back(start, text.size());
  return out;
}

FeatureCatalog FeatureCatalog::load(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, "catalog " + path.string() + ": " + e.what());
  }
  FeatureCatalog catalog;
  catalog.version_ = j.at("version").get<std::string>();

  std::map<std::string, std::size_t> lexicon_index;
  if (j.contains("lexicons")) {
    for (const auto& [name, rel] : j.at("lexicons").items()) {
      lexicon_index[name] = catalog.lexicons_.size();
      catalog.lexicons_.push_back(load_lexicon(name, path.parent_path() / rel.get<std::string>()));
    }
  }

  std::set<std::string> seen;
  for (const auto& e : j.at("features")) {
    FeatureSpec spec;
    spec.id = e.at("id").get<std::string>();
    if (!seen.insert(spec.id).second) throw Error(ErrorCode::Format, "duplicate feature id '" + spec.id + "'");
    spec.category = parse_feature_category(e.at("category").get<std::string>());
    spec.description = e.value("description", "");
    const auto kind_name = e.at("kind").get<std::string>();
    const auto kind = kKinds.find(kind_name);
    if (kind == kKinds.end()) throw Error(ErrorCode::Format, "feature '" + spec.id + "': unknown kind " + kind_name);
    spec.kind = kind->second;
    spec.params = e.value("params", nlohmann::json::object());
    const auto& p = spec.params;
    spec.unit = p.value("unit", "");
    spec.stat = p.value("stat", "");
    spec.char_class = p.value("char_class", "");
    spec.lo = p.value("min_rank", p.value("min_len", 0));
    spec.hi = p.value("max_rank", p.value("max_len", 0));
    if (p.contains("tags")) {
      for (auto& t : as_string_list(p["tags"])) spec.tags.insert(t);
    }
    if (p.contains("numerator")) {
      for (auto& t : as_string_list(p["numerator"])) spec.tags.insert(t);
    }
    if (p.contains("denominator")) {
      for (auto& t : as_string_list(p["denominator"])) spec.tags_denominator.insert(t);
    }
    if (p.contains("chars")) spec.chars = utf8::decode(p["chars"].get<std::string>());
    if (p.contains("lexicon")) {
      for (const auto& name : as_string_list(p["lexicon"])) {
        const auto it = lexicon_index.find(name);
        if (it == lexicon_index.end()) {
          throw Error(ErrorCode::Format, "feature '" + spec.id + "' references unknown lexicon '" + name + "'");
        }
        spec.lexicons.push_back(it->second);
      }
    }
    const bool needs_lexicon = spec.kind == FeatureKind::LexiconDensity || spec.kind == FeatureKind::LexiconTypes ||
                               spec.kind == FeatureKind::LexiconCountLog;
    if (needs_lexicon && spec.lexicons.empty()) {
      throw Error(ErrorCode::Format, "feature '" + spec.id + "' needs a lexicon");
    }
    catalog.entries_.push_back(std::move(spec));
  }
  if (catalog.entries_.empty()) throw Error(ErrorCode::Format, "catalog " + path.string() + " has no features");
  return catalog;
}

std::shared_ptr<const FeatureCatalog> FeatureCatalog::shipped() {
  static std::once_flag once;
  static std::shared_ptr<const FeatureCatalog> instance;
  std::call_once(once, [] {
    instance = std::make_shared<const FeatureCatalog>(load(default_data_dir() / "catalog" / "default_catalog.json"));
  });
  return instance;
}

std::optional<std::size_t> FeatureCatalog::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  return std::nullopt;
}

std::vector<std::string> FeatureCatalog::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.id);
  return out;
}

FeatureExtractor::FeatureExtractor(std::shared_ptr<const FeatureCatalog> catalog,
                                   std::shared_ptr<const Segmenter> segmenter)
    : catalog_(std::move(catalog)), segmenter_(std::move(segmenter)) {
  if (!catalog_ || !segmenter_) throw Error(ErrorCode::Config, "feature extractor needs a catalog and a segmenter");
}

FeatureVector FeatureExtractor::extract(std::string_view text) const {
  if (utf8::is_blank(text)) throw Error(ErrorCode::EmptyText, "cannot extract features from empty text");
  const TokenizedText tokenized = segmenter_->segment(text);
  const TextProfile p = profile(text, tokenized);
  const auto& dict = segmenter_->dictionary();

  const double nonspace = static_cast<double>(p.nonspace);
  const double words = static_cast<double>(p.words.size());
  const double han = static_cast<double>(p.han.size());
  const double per100 = nonspace > 0 ? 100.0 / nonspace : 0.0;

  std::map<std::size_t, LexiconHits> lexicon_hits;
  auto hits_for = [&](const std::vector<std::size_t>& lexicons) {
    LexiconHits total;
    for (auto idx : lexicons) {
      auto it = lexicon_hits.find(idx);
      if (it == lexicon_hits.end()) {
        LexiconHits h;
        match_lexicon(catalog_->lexicons()[idx], tokenized, h);
        it = lexicon_hits.emplace(idx, std::move(h)).first;
      }
      total.count += it->second.count;
      total.types.insert(it->second.types.begin(), it->second.types.end());
    }
    return total;
  };
  auto count_tags = [&](const std::unordered_set<std::string>& tags) {
    double c = 0;
    for (const auto& [tag, n] : p.tag_counts) {
      if (tags.contains(tag)) c += static_cast<double>(n);
    }
    return c;
  };
  auto log_rank = [&](char32_t cp) {
    const auto r = dict.char_rank(cp);
    return std::log(static_cast<double>(r ? *r : dict.ranked_chars() + 1));
  };

  FeatureVector out;
  out.catalog_version = catalog_->version();
  out.values.reserve(catalog_->size());
  for (const auto& f : catalog_->entries()) {
    double v = 0.0;
    switch (f.kind) {
      case FeatureKind::LogCount: {
        double n = 0;
        if (f.unit == "chars") n = nonspace;
        else if (f.unit == "words") n = words;
        else if (f.unit == "sentences") n = static_cast<double>(p.sentences.size());
        v = std::log1p(n);
        break;
      }
      case FeatureKind::CharClassRatio: {
        const auto it = p.char_class.find(f.char_class);
        v = ratio(it == p.char_class.end() ? 0.0 : static_cast<double>(it->second), nonspace);
        break;
      }
      case FeatureKind::FullwidthPunctShare:
        v = ratio(static_cast<double>(p.fullwidth_punct), static_cast<double>(p.punct));
        break;
      case FeatureKind::DistinctHanRatio:
        v = ratio(static_cast<double>(std::set<char32_t>(p.han.begin(), p.han.end()).size()), han);
        break;
      case FeatureKind::CharTierRatio: {
        double c = 0;
        for (char32_t cp : p.han) {
          const auto r = dict.char_rank(cp);
          if (r && static_cast<int>(*r) >= f.lo && (f.hi == 0 || static_cast<int>(*r) <= f.hi)) c += 1;
        }
        v = ratio(c, han);
        break;
      }
      case FeatureKind::UnrankedHanRatio: {
        double c = 0;
        for (char32_t cp : p.han) c += dict.char_rank(cp) ? 0.0 : 1.0;
        v = ratio(c, han);
        break;
      }
      case FeatureKind::CharLogRank: {
        std::vector<double> xs;
        xs.reserve(p.han.size());
        for (char32_t cp : p.han) xs.push_back(log_rank(cp));
        v = stat_of(xs, f.stat);
        break;
      }
      case FeatureKind::MultiCharWordHanShare: {
        double c = 0;
        for (const Token* t : p.words) {
          if (t->end - t->begin < 2) continue;
          for (std::size_t i = t->begin; i < t->end; ++i) c += utf8::is_han(p.cps[i]) ? 1.0 : 0.0;
        }
        v = ratio(c, han);
        break;
      }
      case FeatureKind::TypeTokenRatio:
      case FeatureKind::HapaxRatio: {
        std::map<std::string_view, std::size_t> freq;
        for (const Token* t : p.words) ++freq[t->word];
        if (f.kind == FeatureKind::TypeTokenRatio) {
          v = ratio(static_cast<double>(freq.size()), words);
        } else {
          double once = 0;
          for (const auto& [_, n] : freq) once += n == 1 ? 1.0 : 0.0;
          v = ratio(once, words);
        }
        break;
      }
      case FeatureKind::MeanWordLength: {
        double total = 0;
        for (auto n : p.word_chars) total += static_cast<double>(n);
        v = ratio(total, words);
        break;
      }
      case FeatureKind::WordLengthRatio: {
        double c = 0;
        for (auto n : p.word_chars) {
          const int len = static_cast<int>(n);
          if (len >= f.lo && (f.hi == 0 || len <= f.hi)) c += 1;
        }
        v = ratio(c, words);
        break;
      }
      case FeatureKind::PosRatio:
        v = ratio(count_tags(f.tags), words);
        break;
      case FeatureKind::PosPairRatio:
        v = ratio(count_tags(f.tags), count_tags(f.tags_denominator));
        break;
      case FeatureKind::SentenceLength: {
        std::vector<double> xs;
        for (const auto& s : p.sentences) xs.push_back(f.unit == "tokens" ? s.tokens : s.chars);
        v = stat_of(xs, f.stat);
        break;
      }
      case FeatureKind::ClausesPerSentence: {
        std::vector<double> xs;
        for (const auto& s : p.sentences) xs.push_back(static_cast<double>(s.clauses.size()));
        v = stat_of(xs, f.stat);
        break;
      }
      case FeatureKind::ClauseLength: {
        std::vector<double> xs;
        for (const auto& s : p.sentences) xs.insert(xs.end(), s.clauses.begin(), s.clauses.end());
        v = stat_of(xs, f.stat);
        break;
      }
      case FeatureKind::SentenceLengthShare: {
        double c = 0;
        for (const auto& s : p.sentences) {
          if (s.chars >= f.lo && (f.hi == 0 || s.chars <= f.hi)) c += 1;
        }
        v = ratio(c, static_cast<double>(p.sentences.size()));
        break;
      }
      case FeatureKind::PunctDensity: {
        double c = 0;
        for (char32_t cp : p.cps) c += f.chars.find(cp) != std::u32string::npos ? 1.0 : 0.0;
        v = c * per100;
        break;
      }
      case FeatureKind::LexiconDensity:
        v = static_cast<double>(hits_for(f.lexicons).count) * per100;
        break;
      case FeatureKind::LexiconTypes:
        v = static_cast<double>(hits_for(f.lexicons).types.size());
        break;
      case FeatureKind::LexiconCountLog:
        v = std::log1p(static_cast<double>(hits_for(f.lexicons).count));
        break;
      case FeatureKind::LawCitationDensity:
        v = static_cast<double>(count_law_citations(p.cps)) * per100;
        break;
      case FeatureKind::FourCharFormulaShare: {
        double c = 0;
        for (const Token* t : p.words) c += (t->end - t->begin == 4 && f.tags.contains(t->tag)) ? 1.0 : 0.0;
        v = ratio(c, words);
        break;
      }
    }
    out.values.push_back(std::isfinite(v) ? v : 0.0);
  }
  return out;
}

FeatureVector extract_features(std::string_view text, const FeatureExtractor& extractor) {
  return extractor.extract(text);
}

NormalizationParams fit_normalization(std::span<const FeatureVector> vectors) {
  if (vectors.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "normalization needs at least 2 vectors, got " +
                                                 std::to_string(vectors.size()));
  }
  const auto dim = vectors.front().values.size();
  NormalizationParams p;
  p.catalog_version = vectors.front().catalog_version;
  p.mean.assign(dim, 0.0);
  p.stddev.assign(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.values.size() != dim || v.catalog_version != p.catalog_version) {
      throw Error(ErrorCode::CatalogMismatch, "vectors disagree on catalog version or size");
    }
    for (std::size_t i = 0; i < dim; ++i) p.mean[i] += v.values[i];
  }
  const double n = static_cast<double>(vectors.size());
  for (auto& m : p.mean) m /= n;
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = v.values[i] - p.mean[i];
      p.stddev[i] += d * d;
    }
  }
  for (auto& s : p.stddev) s = std::sqrt(s / n);
  return p;
}

FeatureVector normalize(const FeatureVector& v, const NormalizationParams& params) {
  if (v.catalog_version != params.catalog_version || v.values.size() != params.mean.size()) {
    throw Error(ErrorCode::CatalogMismatch, "feature vector catalog '" + v.catalog_version +
                                                "' does not match normalization catalog '" +
                                                params.catalog_version + "'");
  }
  FeatureVector out;
  out.catalog_version = v.catalog_version;
  out.values.resize(v.values.size());
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    out.values[i] = params.stddev[i] > 0.0 ? (v.values[i] - params.mean[i]) / params.stddev[i] : 0.0;
  }
  return out;
}

nlohmann::json to_json(const NormalizationParams& p) {
  return nlohmann::json{{"catalog_version", p.catalog_version}, {"mean", p.mean}, {"stddev", p.stddev}};
}

NormalizationParams normalization_from_json(const nlohmann::json& j) {
  NormalizationParams p;
  p.catalog_version = j.at("catalog_version").get<std::string>();
  p.mean = j.at("mean").get<std::vector<double>>();
  p.stddev = j.at("stddev").get<std::vector<double>>();
  if (p.mean.size() != p.stddev.size()) throw Error(ErrorCode::Format, "normalization mean/stddev length differ");
  for (double s : p.stddev) {
    if (!(s >= 0.0)) throw Error(ErrorCode::Format, "normalization stddev must be non-negative");
  }
  return p;
}

}  // namespace legalstyle
