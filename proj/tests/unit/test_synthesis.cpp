#include <gtest/gtest.h>

#include <set>

#include "legalstyle/data_paths.hpp"
#include "legalstyle/document.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/mock_backend.hpp"
#include "legalstyle/synthesis.hpp"
#include "legalstyle/synthetic.hpp"
#include "support.hpp"

using namespace legalstyle;
using legalstyle::test_support::ScriptedBackend;
using legalstyle::test_support::no_sleep_options;

namespace {

std::vector<Document> corpus_docs(std::size_t n, std::uint64_t seed) {
  std::vector<Document> docs;
  for (const auto& r : generate_corpus(n, seed)) docs.push_back(split_sections(r.id, r.text));
  return docs;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

std::string payload_text(const ChatRequest& r) { return r.payload.at("text"); }

}  // namespace

TEST(Entities, NumbersNamesInTextOrder) {
  const EntityExtractor e(Segmenter::shipped());
  EXPECT_EQ(e.extract("被告张某应当于2019年3月5日前支付货款12.5万元。"),
            (std::vector<std::string>{"张某", "2019", "3", "5", "12.5"}));
  EXPECT_EQ(e.extract("依照《中华人民共和国合同法》第一百零七条之规定"),
            (std::vector<std::string>{"中华人民共和国", "一百零七"}));
  EXPECT_EQ(e.extract("李某某与王某支付１２３元，共1,250元，1,250元。"),
            (std::vector<std::string>{"李某某", "王某", "１２３", "1,250"}));
  EXPECT_TRUE(e.extract("本院认为，应当支持。").empty());
}

TEST(Entities, OverlapFraction) {
  EXPECT_DOUBLE_EQ(entity_overlap({}, "任意"), 1.0);
  EXPECT_DOUBLE_EQ(entity_overlap({"张某", "2019"}, "张某于当年"), 0.5);
  EXPECT_DOUBLE_EQ(entity_overlap({"张某", "2019"}, "张某于2019年"), 1.0);
}

TEST(Emphasis, TagsParseAndUnknownIsRejected) {
  for (auto e : kEmphases) EXPECT_EQ(parse_emphasis(to_string(e)), e);
  EXPECT_EQ(code_of([] { (void)parse_emphasis("casual"); }), ErrorCode::InvalidEmphasis);
  EXPECT_EQ(code_of([] { (void)PromptSet::shipped()->emphasis_instruction("casual"); }), ErrorCode::InvalidEmphasis);
}

TEST(Synthesis, MockPairKeepsGoldAndEntities) {
  Gateway gw(std::make_shared<MockBackend>(42), no_sleep_options());
  const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped());
  const auto doc = corpus_docs(1, 1).front();
  const auto pair = s.make_pair(doc);
  EXPECT_EQ(pair.gold, doc.reasoning());
  EXPECT_FALSE(pair.reverse.empty());
  EXPECT_FALSE(pair.restored.empty());
  EXPECT_NE(pair.reverse, pair.gold);
  const EntityExtractor ents(Segmenter::shipped());
  EXPECT_GE(entity_overlap(ents.extract(pair.gold), pair.reverse), 0.9);
  EXPECT_EQ(pair.provenance.at("prompt_version"), PromptSet::shipped()->version());
  EXPECT_EQ(pair.provenance.at("degrade").at("model"), "mock-degrade");
  EXPECT_EQ(pair.provenance.at("restore").at("template_sha"), PromptSet::shipped()->template_sha("restore"));
  EXPECT_EQ(pair.provenance.at("degrade").at("attempts"), 1);
}

TEST(Synthesis, DegradationDroppingAPartyIsRejectedAfterRetries) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->on_complete = [](const ChatRequest&, int) { return std::string("有人欠钱不还。"); };
  Gateway gw(backend, no_sleep_options());
  const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped(), SynthesisOptions{0.9, 3, 1});
  EXPECT_EQ(code_of([&] { (void)s.degrade("本院认为，张某应当向李某支付货款。"); }), ErrorCode::DegradationRejected);
  EXPECT_EQ(backend->complete_calls, 3);
}

TEST(Synthesis, NoEntitiesPassesVacuously) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->on_complete = [](const ChatRequest&, int) { return std::string("法院觉得可以。"); };
  Gateway gw(backend, no_sleep_options());
  const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped());
  EXPECT_EQ(s.degrade("本院认为，应当支持。"), "法院觉得可以。");
}

TEST(Synthesis, FailedDocumentIsSkippedAndCounted) {
  auto backend = std::make_shared<ScriptedBackend>();
  backend->on_complete = [](const ChatRequest& r, int) {
    const auto t = payload_text(r);
    if (t.find("李某") != std::string::npos) return std::string("无关内容。");
    return t;
  };
  Gateway gw(backend, no_sleep_options());
  const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped());
  const std::vector<Document> docs = {split_sections("a", "本院认为，张某应当付款。"),
                                      split_sections("b", "本院认为，李某应当付款。"),
                                      split_sections("c", "本院认为，王某应当付款。")};
  const auto result = s.synthesize_corpus(docs, 3);
  ASSERT_EQ(result.pairs.size(), 2u);
  ASSERT_EQ(result.skipped.size(), 1u);
  EXPECT_EQ(result.pairs[0].doc_id, "a");
  EXPECT_EQ(result.pairs[1].doc_id, "c");
  EXPECT_EQ(result.skipped[0].doc_id, "b");
  EXPECT_EQ(result.pairs.size() + result.skipped.size(), 3u);
}

TEST(Synthesis, CorpusSizeContracts) {
  Gateway gw(std::make_shared<MockBackend>(1), no_sleep_options());
  const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped());
  const auto docs = corpus_docs(2, 2);
  EXPECT_TRUE(s.synthesize_corpus(docs, 0).pairs.empty());
  EXPECT_EQ(code_of([&] { (void)s.synthesize_corpus(docs, 3); }), ErrorCode::Config);

  auto failing = std::make_shared<ScriptedBackend>();
  failing->on_complete = [](const ChatRequest&, int) -> std::string { throw TransientBackendError(503, "down"); };
  auto opts = no_sleep_options();
  opts.retry.max_retries = 0;
  Gateway down(failing, opts);
  const Synthesizer d(down, PromptSet::shipped(), Segmenter::shipped());
  EXPECT_EQ(code_of([&] { (void)d.synthesize_corpus(docs, 2); }), ErrorCode::SynthesisFailed);
}

TEST(Synthesis, DeterministicAcrossRunsAndWorkerCounts) {
  const auto docs = corpus_docs(12, 8);
  auto run = [&](std::size_t workers) {
    Gateway gw(std::make_shared<MockBackend>(42), no_sleep_options());
    const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped(), SynthesisOptions{0.9, 3, workers});
    return pairs_to_jsonl(s.synthesize_corpus(docs, docs.size()).pairs);
  };
  const auto one = run(1);
  EXPECT_EQ(one, run(1));
  EXPECT_EQ(one, run(4));
}

TEST(Synthesis, PairsRoundTripThroughJsonl) {
  Gateway gw(std::make_shared<MockBackend>(42), no_sleep_options());
  const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped());
  const auto pairs = s.synthesize_corpus(corpus_docs(3, 4), 3).pairs;
  test_support::TempDir dir;
  write_file(dir / "p.jsonl", pairs_to_jsonl(pairs));
  EXPECT_EQ(read_pairs_jsonl(dir / "p.jsonl"), pairs);
}

TEST(Variants, FiveEmphasesWithDistinctPrompts) {
  Gateway gw(std::make_shared<MockBackend>(42), no_sleep_options());
  const Synthesizer s(gw, PromptSet::shipped(), Segmenter::shipped());
  const auto doc = corpus_docs(1, 6).front();
  const auto variants = s.generate_test_variants(doc);
  ASSERT_EQ(variants.size(), 5u);
  std::set<std::string> shas, instructions, ids;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto& v = variants[i];
    EXPECT_EQ(v.emphasis, to_string(kEmphases[i]));
    EXPECT_EQ(v.reference, doc.reasoning());
    EXPECT_EQ(v.doc_id, doc.id);
    EXPECT_FALSE(v.text.empty());
    shas.insert(v.provenance.at("prompt_sha").get<std::string>());
    instructions.insert(v.provenance.at("emphasis_instruction").get<std::string>());
    ids.insert(v.id);
  }
  EXPECT_EQ(shas.size(), 5u);
  EXPECT_EQ(instructions.size(), 5u);
  EXPECT_EQ(ids.size(), 5u);
  EXPECT_EQ(variants_to_jsonl(s.generate_test_variants(doc)), variants_to_jsonl(variants));
  EXPECT_EQ(s.restore_variant("法院觉得可以。", Emphasis::Formality),
            s.restore_variant("法院觉得可以。", Emphasis::Formality));
}
