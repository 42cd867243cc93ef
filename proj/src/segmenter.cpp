#include "legalstyle/segmenter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <mutex>

#include <nlohmann/json.hpp>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/utf8.hpp"

namespace legalstyle {

namespace {

// Characters that may form a dictionary block: CJK U+4E00..U+9FD5, ASCII
// alphanumerics and "+#&._".
bool in_block(char32_t cp) noexcept {
  if (cp >= 0x4E00 && cp <= 0x9FD5) return true;
  if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9')) return true;
  return cp == '+' || cp == '#' || cp == '&' || cp == '.' || cp == '_';
}

bool is_ascii_alnum(char32_t cp) noexcept {
  return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
}

}  // namespace

std::shared_ptr<const Dictionary> Dictionary::load(const std::filesystem::path& dict_path,
                                                   const std::filesystem::path& tagset_path) {
  auto dict = std::make_shared<Dictionary>();

  const auto tagset = nlohmann::json::parse(read_file(tagset_path));
  dict->tagset_version_ = tagset.at("version").get<std::string>();
  for (const auto& [tag, _] : tagset.at("tags").items()) dict->tagset_.insert(tag);

  const std::string raw = read_file(dict_path);
  std::int64_t total = 0;
  std::unordered_map<char32_t, std::int64_t> char_freq;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string::npos) eol = raw.size();
    std::string_view line(raw.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) continue;

    const auto sp1 = line.find(' ');
    if (sp1 == std::string_view::npos) {
      throw Error(ErrorCode::Format, "dictionary line " + std::to_string(line_no) + " lacks a frequency");
    }
    const auto sp2 = line.find(' ', sp1 + 1);
    const auto freq_text = line.substr(sp1 + 1, sp2 == std::string_view::npos ? std::string_view::npos : sp2 - sp1 - 1);
    std::int64_t freq = 0;
    const auto [ptr, ec] = std::from_chars(freq_text.data(), freq_text.data() + freq_text.size(), freq);
    if (ec != std::errc{} || ptr != freq_text.data() + freq_text.size()) {
      throw Error(ErrorCode::Format, "dictionary line " + std::to_string(line_no) + " has a bad frequency");
    }
    std::string tag = sp2 == std::string_view::npos ? std::string() : std::string(line.substr(sp2 + 1));
    if (!tag.empty() && !dict->tagset_.contains(tag)) {
      throw Error(ErrorCode::Format, "dictionary tag '" + tag + "' is not in the tagset");
    }

    const auto word = utf8::decode(line.substr(0, sp1));
    auto& entry = dict->entries_[word];
    entry.freq = freq;
    if (!tag.empty()) entry.tag = std::move(tag);
    total += freq;
    for (std::size_t len = 1; len < word.size(); ++len) {
      dict->entries_.try_emplace(word.substr(0, len));
    }
    for (char32_t cp : word) {
      if (utf8::is_han(cp)) char_freq[cp] += freq;
    }
  }
  if (total <= 0) {
    throw Error(ErrorCode::Format, "dictionary " + dict_path.string() + " is empty");
  }
  dict->log_total_ = std::log(static_cast<double>(total));

  std::vector<std::pair<char32_t, std::int64_t>> ranked(char_freq.begin(), char_freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    dict->char_rank_.emplace(ranked[i].first, static_cast<std::uint32_t>(i + 1));
  }
  return dict;
}

std::shared_ptr<const Dictionary> Dictionary::shipped() {
  static std::once_flag once;
  static std::shared_ptr<const Dictionary> instance;
  std::call_once(once, [] {
    const auto dir = default_data_dir() / "dict";
    instance = load(dir / "jieba_dict.txt", dir / "tagset.json");
  });
  return instance;
}

std::optional<std::int64_t> Dictionary::frequency(std::u32string_view word) const {
  const auto it = entries_.find(std::u32string(word));
  if (it == entries_.end()) return std::nullopt;
  return it->second.freq;
}

std::string_view Dictionary::tag(std::u32string_view word) const {
  const auto it = entries_.find(std::u32string(word));
  if (it == entries_.end() || it->second.tag.empty()) return "x";
  return it->second.tag;
}

std::optional<std::uint32_t> Dictionary::char_rank(char32_t cp) const {
  const auto it = char_rank_.find(cp);
  if (it == char_rank_.end()) return std::nullopt;
  return it->second;
}

Segmenter::Segmenter(std::shared_ptr<const Dictionary> dictionary) : dictionary_(std::move(dictionary)) {
  if (!dictionary_) throw Error(ErrorCode::Config, "segmenter requires a dictionary");
}

std::shared_ptr<const Segmenter> Segmenter::shipped() {
  static std::once_flag once;
  static std::shared_ptr<const Segmenter> instance;
  std::call_once(once, [] { instance = std::make_shared<const Segmenter>(Dictionary::shipped()); });
  return instance;
}

TokenizedText Segmenter::segment(std::string_view text) const {
  if (text.empty()) throw Error(ErrorCode::EmptyText, "cannot segment empty text");
  const std::u32string cps = utf8::decode(text);
  TokenizedText out;
  std::size_t i = 0;
  const std::size_t n = cps.size();
  while (i < n) {
    if (in_block(cps[i])) {
      std::size_t j = i;
      while (j < n && in_block(cps[j])) ++j;
      cut_block(std::u32string_view(cps).substr(i, j - i), i, out.tokens);
      i = j;
      continue;
    }
    // Outside blocks every character is its own token; "\r\n" stays together.
    std::size_t len = 1;
    if (cps[i] == '\r' && i + 1 < n && cps[i + 1] == '\n') len = 2;
    out.tokens.push_back(Token{utf8::encode(std::u32string_view(cps).substr(i, len)), "x", i, i + len});
    i += len;
  }
  return out;
}

void Segmenter::cut_block(std::u32string_view block, std::size_t offset, std::vector<Token>& out) const {
  const std::size_t n = block.size();
  // Candidate word ends for each start position.
  std::vector<std::vector<std::size_t>> dag(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = k; i < n; ++i) {
      const auto freq = dictionary_->frequency(block.substr(k, i - k + 1));
      if (!freq) break;
      if (*freq > 0) dag[k].push_back(i);
    }
    if (dag[k].empty()) dag[k].push_back(k);
  }

  // Best log-probability route from each position to the end; ties prefer
  // the longer word.
  std::vector<double> best(n + 1, 0.0);
  std::vector<std::size_t> next_end(n + 1, 0);
  const double log_total = dictionary_->log_total();
  for (std::size_t idx = n; idx-- > 0;) {
    bool first = true;
    for (std::size_t x : dag[idx]) {
      const auto freq = dictionary_->frequency(block.substr(idx, x - idx + 1)).value_or(0);
      const double value =
          (std::log(static_cast<double>(freq != 0 ? freq : 1)) - log_total) + best[x + 1];
      if (first || value >= best[idx]) {
        best[idx] = value;
        next_end[idx] = x;
        first = false;
      }
    }
  }

  std::size_t x = 0;
  std::size_t buf_begin = 0;
  bool buffering = false;
  auto flush = [&](std::size_t end) {
    if (!buffering) return;
    out.push_back(Token{utf8::encode(block.substr(buf_begin, end - buf_begin)), "eng",
                        offset + buf_begin, offset + end});
    buffering = false;
  };
  while (x < n) {
    const std::size_t y = next_end[x] + 1;
    const auto word = block.substr(x, y - x);
    if (word.size() == 1 && is_ascii_alnum(word[0])) {
      if (!buffering) {
        buffering = true;
        buf_begin = x;
      }
    } else {
      flush(x);
      out.push_back(Token{utf8::encode(word), std::string(dictionary_->tag(word)), offset + x, offset + y});
    }
    x = y;
  }
  flush(n);
}

}  // namespace legalstyle
