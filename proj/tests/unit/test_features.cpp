#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "legalstyle/error.hpp"
#include "legalstyle/features.hpp"
#include "legalstyle/synthetic.hpp"
#include "legalstyle/utf8.hpp"

using namespace legalstyle;

namespace {

const FeatureExtractor& extractor() {
  static const FeatureExtractor e(FeatureCatalog::shipped(), Segmenter::shipped());
  return e;
}

double feature(const FeatureVector& v, std::string_view id) {
  const auto idx = extractor().catalog().index_of(id);
  if (!idx) throw std::runtime_error("no feature " + std::string(id));
  return v.values.at(*idx);
}

FeatureVector vec(std::vector<double> values) { return FeatureVector{std::move(values), "v"}; }

}  // namespace

TEST(Catalog, HasOneHundredUniqueFeaturesAcrossFiveCategories) {
  const auto& cat = extractor().catalog();
  EXPECT_EQ(cat.size(), 100u);
  EXPECT_FALSE(cat.version().empty());
  const auto ids = cat.ids();
  EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
  std::set<FeatureCategory> cats;
  for (const auto& e : cat.entries()) cats.insert(e.category);
  EXPECT_EQ(cats.size(), 5u);
  ASSERT_TRUE(cat.index_of("legalese_density").has_value());
  EXPECT_EQ(cat.entries()[*cat.index_of("legalese_density")].category, FeatureCategory::Collocation);
}

TEST(Features, HandCountedSentenceStatistics) {
  // Two four-character sentences, each closed by a full stop.
  const auto v = extractor().extract("本院认为。判决如下。");
  EXPECT_EQ(v.values.size(), 100u);
  EXPECT_DOUBLE_EQ(feature(v, "sentence_chars_mean"), 4.0);
  EXPECT_DOUBLE_EQ(feature(v, "sentence_chars_max"), 4.0);
  EXPECT_DOUBLE_EQ(feature(v, "sentence_chars_min"), 4.0);
  EXPECT_DOUBLE_EQ(feature(v, "sentence_chars_std"), 0.0);
  EXPECT_DOUBLE_EQ(feature(v, "sentence_count_log"), std::log1p(2.0));
  EXPECT_DOUBLE_EQ(feature(v, "clauses_per_sentence_mean"), 1.0);
  EXPECT_DOUBLE_EQ(feature(v, "clause_chars_mean"), 4.0);
  EXPECT_DOUBLE_EQ(feature(v, "short_sentence_share"), 1.0);
  EXPECT_DOUBLE_EQ(feature(v, "long_sentence_share"), 0.0);
}

TEST(Features, HandCountedCharacterStatistics) {
  // 10 non-space characters: 8 Han, 2 full stops; whitespace is ignored.
  const auto v = extractor().extract("本院认为。 判决如下。\n");
  EXPECT_DOUBLE_EQ(feature(v, "char_count_log"), std::log1p(10.0));
  EXPECT_DOUBLE_EQ(feature(v, "han_char_ratio"), 0.8);
  EXPECT_DOUBLE_EQ(feature(v, "punct_char_ratio"), 0.2);
  EXPECT_DOUBLE_EQ(feature(v, "period_density"), 20.0);
  EXPECT_DOUBLE_EQ(feature(v, "fullwidth_punct_share"), 1.0);
  EXPECT_DOUBLE_EQ(feature(v, "distinct_han_ratio"), 1.0);
  EXPECT_DOUBLE_EQ(feature(v, "digit_char_ratio"), 0.0);
}

TEST(Features, LexiconMatchesAreTokenAligned) {
  // "本院认为" is one token and one legalese phrase; "本院" inside it does not
  // count separately.
  const auto v = extractor().extract("本院认为。");
  EXPECT_DOUBLE_EQ(feature(v, "legalese_count_log"), std::log1p(1.0));
  EXPECT_DOUBLE_EQ(feature(v, "legalese_types"), 1.0);
  EXPECT_DOUBLE_EQ(feature(v, "legalese_density"), 100.0 / 5.0);
}

TEST(Features, LawCitationDensity) {
  const std::string text = "依照《中华人民共和国民法典》第五百七十七条之规定";
  const auto v = extractor().extract(text);
  EXPECT_DOUBLE_EQ(feature(v, "law_citation_density"), 100.0 / 24.0);
  EXPECT_DOUBLE_EQ(feature(v, "book_title_density"), 2.0 * 100.0 / 24.0);
}

TEST(Features, AbsentPosRatioIsZero) {
  const auto v = extractor().extract("本院认为。判决如下。");
  EXPECT_EQ(feature(v, "pos_latin_ratio"), 0.0);
  EXPECT_EQ(feature(v, "pos_interjection_ratio"), 0.0);
}

TEST(Features, EmptyDenominatorsGiveZero) {
  const auto v = extractor().extract("。。。");
  EXPECT_EQ(feature(v, "han_char_ratio"), 0.0);
  EXPECT_EQ(feature(v, "type_token_ratio"), 0.0);
  EXPECT_EQ(feature(v, "noun_verb_ratio"), 0.0);
  EXPECT_EQ(feature(v, "sentence_chars_mean"), 0.0);
}

TEST(Features, EmptyTextIsRejected) {
  EXPECT_THROW((void)extractor().extract(""), Error);
  try {
    (void)extractor().extract(" \n　");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyText);
  }
}

TEST(Features, DeterministicAndIndependentOfCorpusOrder) {
  auto corpus = generate_corpus(6, 21);
  std::vector<FeatureVector> first;
  for (const auto& r : corpus) first.push_back(extractor().extract(r.text));
  std::reverse(corpus.begin(), corpus.end());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    EXPECT_EQ(extractor().extract(corpus[i].text), first[corpus.size() - 1 - i]);
  }
}

TEST(Features, TotalOnArbitraryInput) {
  std::mt19937 rng(7);
  const std::u32string alphabet = U"本院认为的了是，。；：“”《》（）！？ 　\n0123456789abcXYZ一二三第条、.,;:!?-_+#&";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<std::size_t> len(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    std::u32string s;
    const auto n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s.push_back(alphabet[pick(rng)]);
    const auto text = utf8::encode(s);
    if (utf8::is_blank(text)) continue;
    for (double x : extractor().extract(text).values) ASSERT_TRUE(std::isfinite(x)) << text;
  }
}

TEST(SentenceSplit, ClosingQuotesStayWithTheirSentence) {
  const auto s = split_sentences(U"他说：“好。”然后走了");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], std::make_pair(std::size_t{0}, std::size_t{7}));
  EXPECT_EQ(s[1], std::make_pair(std::size_t{7}, std::size_t{11}));
  EXPECT_EQ(split_sentences(U"无终止符").size(), 1u);
}

TEST(Normalization, PopulationStatistics) {
  const std::vector<FeatureVector> vs = {vec({1, 5}), vec({2, 5}), vec({3, 5})};
  const auto p = fit_normalization(vs);
  EXPECT_DOUBLE_EQ(p.mean[0], 2.0);
  EXPECT_NEAR(p.stddev[0], std::sqrt(2.0 / 3.0), 1e-12);
  EXPECT_DOUBLE_EQ(p.mean[1], 5.0);
  EXPECT_DOUBLE_EQ(p.stddev[1], 0.0);
  EXPECT_EQ(p.catalog_version, "v");
}

TEST(Normalization, ZScoresOfOneTwoThree) {
  const std::vector<FeatureVector> vs = {vec({1, 5}), vec({2, 5}), vec({3, 5})};
  const auto p = fit_normalization(vs);
  const double z = std::sqrt(1.5);
  EXPECT_NEAR(normalize(vs[0], p).values[0], -z, 1e-9);
  EXPECT_NEAR(normalize(vs[1], p).values[0], 0.0, 1e-9);
  EXPECT_NEAR(normalize(vs[2], p).values[0], z, 1e-9);
  EXPECT_EQ(normalize(vec({7, 123}), p).values[1], 0.0);
}

TEST(Normalization, FittedSetHasZeroMeanUnitStd) {
  std::vector<FeatureVector> vs;
  for (const auto& r : generate_corpus(12, 4)) vs.push_back(extractor().extract(r.text));
  const auto p = fit_normalization(vs);
  for (std::size_t j = 0; j < p.mean.size(); ++j) {
    if (p.stddev[j] == 0.0) continue;
    double m = 0, s = 0;
    for (const auto& v : vs) m += normalize(v, p).values[j];
    m /= static_cast<double>(vs.size());
    for (const auto& v : vs) s += std::pow(normalize(v, p).values[j] - m, 2);
    EXPECT_NEAR(m, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(s / static_cast<double>(vs.size())), 1.0, 1e-9);
  }
}

TEST(Normalization, Errors) {
  const std::vector<FeatureVector> one = {vec({1})};
  try {
    (void)fit_normalization(one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
  const std::vector<FeatureVector> mixed = {vec({1}), FeatureVector{{2}, "w"}};
  EXPECT_THROW((void)fit_normalization(mixed), Error);
  const std::vector<FeatureVector> two = {vec({1}), vec({2})};
  const auto p = fit_normalization(two);
  EXPECT_THROW((void)normalize(FeatureVector{{1}, "w"}, p), Error);
  EXPECT_EQ(normalization_from_json(to_json(p)), p);
}
