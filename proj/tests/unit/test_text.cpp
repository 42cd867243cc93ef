#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/document.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/segmenter.hpp"
#include "legalstyle/synthetic.hpp"
#include "legalstyle/utf8.hpp"
#include "support.hpp"

using namespace legalstyle;

namespace {

const Segmenter& seg() { return *Segmenter::shipped(); }

std::string non_space(std::string_view s) {
  std::u32string out;
  for (char32_t cp : utf8::decode(s)) {
    if (!utf8::is_space(cp)) out.push_back(cp);
  }
  return utf8::encode(out);
}

const char* kJudgment =
    "北京市海淀区人民法院\n民事判决书\n原告张某与被告李某买卖合同纠纷一案。\n"
    "张某向本院提出诉讼请求：判令李某支付货款。\n"
    "本院认为，双方买卖合同合法有效，李某应当支付货款。\n"
    "依照《中华人民共和国民法典》第五百七十七条之规定，判决如下：\n一、李某支付货款。\n"
    "如不服本判决，可在十五日内上诉。\n审判员　王某\n";

}  // namespace

TEST(Utf8, RoundTripsAndCountsCodePoints) {
  const std::string s = "本院认为，abc１２３";
  EXPECT_EQ(utf8::encode(utf8::decode(s)), s);
  EXPECT_EQ(utf8::length(s), 11u);
}

TEST(Utf8, MalformedBytesBecomeReplacement) {
  const auto cps = utf8::decode(std::string("a\xff" "b"));
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], 0xFFFD);
}

TEST(Utf8, NfcComposesCombiningMarks) {
  EXPECT_EQ(utf8::nfc("e\xcc\x81"), "\xc3\xa9");
  EXPECT_EQ(utf8::nfc("本院认为"), "本院认为");
}

TEST(Utf8, SpaceAndPunctClasses) {
  EXPECT_TRUE(utf8::is_space(U'　'));
  EXPECT_TRUE(utf8::is_space(U'\n'));
  EXPECT_FALSE(utf8::is_space(U'本'));
  EXPECT_TRUE(utf8::is_punct(U'，'));
  EXPECT_TRUE(utf8::is_punct(U'《'));
  EXPECT_FALSE(utf8::is_punct(U'a'));
  EXPECT_TRUE(utf8::is_han(U'院'));
  EXPECT_TRUE(utf8::is_blank(" \n　"));
  EXPECT_EQ(utf8::trim("　 本院 \n"), "本院");
}

TEST(Segmenter, MatchesReferenceSegmentationFixture) {
  const auto fixture = nlohmann::json::parse(read_file(std::filesystem::path(LEGALSTYLE_TEST_DATA_DIR) /
                                                       "segmentation_fixture.json"));
  ASSERT_FALSE(fixture.at("cases").empty());
  for (const auto& c : fixture.at("cases")) {
    const auto text = c.at("text").get<std::string>();
    const auto got = seg().segment(text).tokens;
    std::vector<Token> want;
    for (const auto& t : c.at("tokens")) {
      want.push_back(Token{t.at("word").get<std::string>(), t.at("tag").get<std::string>(),
                           t.at("begin").get<std::size_t>(), t.at("end").get<std::size_t>()});
    }
    EXPECT_EQ(got, want) << text;
  }
}

TEST(Segmenter, SingleWordCoversWholeInput) {
  const auto toks = seg().segment("本院认为").tokens;
  ASSERT_EQ(toks.size(), 1u);
  EXPECT_EQ(toks[0].begin, 0u);
  EXPECT_EQ(toks[0].end, 4u);
}

TEST(Segmenter, IsDeterministic) {
  const std::string text = "本院认为，被告张某应当于2019年3月5日前支付货款12.5万元。";
  EXPECT_EQ(seg().segment(text), seg().segment(text));
  const Segmenter fresh(Dictionary::shipped());
  EXPECT_EQ(fresh.segment(text), seg().segment(text));
}

TEST(Segmenter, OffsetsTileTheInputOnGeneratedDocuments) {
  for (const auto& rec : generate_corpus(8, 3)) {
    const auto toks = seg().segment(rec.text).tokens;
    const auto cps = utf8::decode(rec.text);
    std::size_t pos = 0;
    std::string surface;
    for (const auto& t : toks) {
      ASSERT_EQ(t.begin, pos);
      ASSERT_LT(t.begin, t.end);
      ASSERT_EQ(utf8::encode(std::u32string_view(cps).substr(t.begin, t.end - t.begin)), t.word);
      surface += t.word;
      pos = t.end;
    }
    EXPECT_EQ(pos, cps.size());
    EXPECT_EQ(non_space(surface), non_space(rec.text));
  }
}

TEST(Segmenter, TagsComeFromTheFrozenTagset) {
  const auto& dict = seg().dictionary();
  EXPECT_FALSE(dict.tagset_version().empty());
  for (const auto& rec : generate_corpus(4, 11)) {
    for (const auto& t : seg().segment(rec.text).tokens) EXPECT_TRUE(dict.known_tag(t.tag)) << t.word << "/" << t.tag;
  }
}

TEST(Segmenter, EmptyInputIsAnError) {
  try {
    (void)seg().segment("");
    ADD_FAILURE() << "no error thrown";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyText);
  }
}

TEST(Dictionary, CharRanksAreDenseFromOne) {
  const auto& dict = seg().dictionary();
  ASSERT_GT(dict.ranked_chars(), 1000u);
  EXPECT_TRUE(dict.char_rank(U'的').has_value());
  ASSERT_TRUE(dict.char_rank(U'薨').has_value());
  EXPECT_LT(*dict.char_rank(U'的'), 100u);
  EXPECT_LT(*dict.char_rank(U'的'), *dict.char_rank(U'薨'));
  EXPECT_FALSE(dict.char_rank(U'a').has_value());
}

TEST(Sections, ReasoningStartsAtMarker) {
  const auto doc = split_sections("d1", kJudgment);
  EXPECT_TRUE(doc.reasoning().starts_with("本院认为"));
  EXPECT_EQ(doc.reasoning().find("判决如下"), std::string_view::npos);
}

TEST(Sections, AllFiveSectionsOrderedAndContiguous) {
  const auto doc = split_sections("d1", kJudgment);
  std::size_t prev_end = 0;
  for (auto kind : kSectionKinds) {
    const auto span = doc.sections[static_cast<std::size_t>(kind)];
    EXPECT_FALSE(span.empty()) << to_string(kind);
    EXPECT_LE(prev_end, span.begin);
    EXPECT_LE(span.end, doc.raw_text.size());
    EXPECT_NE(doc.raw_text.find(doc.section(kind)), std::string::npos);
    prev_end = span.end;
  }
  EXPECT_TRUE(doc.section(SectionKind::Judgment).starts_with("依照"));
  EXPECT_TRUE(doc.section(SectionKind::Footer).starts_with("如不服本判决"));
}

TEST(Sections, UnionCoversTextExceptWhitespace) {
  for (const auto& rec : generate_corpus(10, 5)) {
    const auto doc = split_sections(rec.id, rec.text);
    std::size_t pos = 0;
    for (auto kind : kSectionKinds) {
      const auto span = doc.sections[static_cast<std::size_t>(kind)];
      if (span.empty()) continue;
      EXPECT_TRUE(utf8::is_blank(std::string_view(doc.raw_text).substr(pos, span.begin - pos)));
      pos = span.end;
    }
    EXPECT_TRUE(utf8::is_blank(std::string_view(doc.raw_text).substr(pos)));
  }
}

TEST(Sections, MarkerFreeTextIsRejected) {
  try {
    (void)split_sections("x", "这是一段没有任何标记的文字。");
    FAIL() << "expected SectionSplit";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SectionSplit);
    EXPECT_EQ(e.detail(), "这是一段没有任何标记的文字。");
  }
}

TEST(Sections, CustomMarkerTable) {
  const auto markers = SectionMarkers::from_json(nlohmann::json{{"reasoning", {"法院认为"}}});
  const auto doc = split_sections("x", "原告诉称，被告欠款。法院认为，被告应当还款。", markers);
  EXPECT_TRUE(doc.reasoning().starts_with("法院认为"));
  EXPECT_THROW((void)SectionMarkers::from_json(nlohmann::json{{"reasoning", nlohmann::json::array()}}), Error);
}

TEST(Corpus, ReadsNormalizesAndRejectsDuplicates) {
  test_support::TempDir dir;
  write_file(dir / "ok.jsonl", "{\"id\":\"a\",\"text\":\"e\xcc\x81\",\"extra\":1}\n\n{\"id\":\"b\",\"text\":\"本院认为\"}\n");
  const auto recs = read_corpus_jsonl(dir / "ok.jsonl");
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].text, "\xc3\xa9");
  EXPECT_EQ(read_corpus_jsonl(dir / "ok.jsonl"), recs);

  write_file(dir / "dup.jsonl", "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n");
  EXPECT_THROW((void)read_corpus_jsonl(dir / "dup.jsonl"), Error);
  write_file(dir / "bad.jsonl", "{\"id\":\"a\"}\n");
  EXPECT_THROW((void)read_corpus_jsonl(dir / "bad.jsonl"), Error);
  try {
    (void)read_corpus_jsonl(dir / "missing.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
    EXPECT_NE(std::string(e.what()).find("missing.jsonl"), std::string::npos);
  }
}

TEST(Corpus, JsonlRoundTrip) {
  test_support::TempDir dir;
  const auto corpus = generate_corpus(3, 9);
  write_file(dir / "c.jsonl", corpus_to_jsonl(corpus));
  EXPECT_EQ(read_corpus_jsonl(dir / "c.jsonl"), corpus);
}
