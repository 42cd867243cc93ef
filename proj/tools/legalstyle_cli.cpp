#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "legalstyle/config.hpp"
#include "legalstyle/data_paths.hpp"
#include "legalstyle/error.hpp"
#include "legalstyle/features.hpp"
#include "legalstyle/pipeline.hpp"
#include "legalstyle/ratings.hpp"
#include "legalstyle/synthesis.hpp"
#include "legalstyle/synthetic.hpp"

namespace fs = std::filesystem;
using namespace legalstyle;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::size_t> workers;
  std::string run_dir = "run";
  bool verbose = false;
  bool quiet = false;
};

PipelineConfig resolve_config(const Globals& g) {
  PipelineConfig config = g.config_path.empty() ? PipelineConfig{} : load_config(g.config_path);
  if (g.seed) config.seed = *g.seed;
  if (g.backend) config.backend = parse_backend_kind(*g.backend);
  if (g.workers) config.workers = *g.workers;
  config.validate();
  return config;
}

const Lexicon& find_lexicon(const FeatureCatalog& catalog, const std::string& name) {
  for (const auto& lex : catalog.lexicons()) {
    if (lex.name == name) return lex;
  }
  throw Error(ErrorCode::Config, "catalog has no lexicon named " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference-free style scoring for Chinese legal judgment reasoning"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed for the mock backend and synthetic generators");
  app.add_option("--backend", g.backend, "Backend kind")->check(CLI::IsMember({"mock", "live"}));
  app.add_option("--workers", g.workers, "Worker threads");
  app.add_option("--run-dir", g.run_dir, "Run directory holding every stage's outputs");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");
  app.add_flag("-q,--quiet", g.quiet, "Only log errors");

  auto* gen = app.add_subcommand("gen-corpus", "Write a seeded synthetic judgment corpus as JSONL");
  std::size_t gen_docs = 60;
  std::string gen_out;
  std::string gen_prefix = "doc";
  gen->add_option("--docs", gen_docs, "Number of documents")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Output JSONL path")->required();
  gen->add_option("--prefix", gen_prefix, "Document id prefix");

  auto* synth = app.add_subcommand("synth", "Synthesize contrastive pairs from a corpus");
  std::string synth_corpus;
  std::optional<std::size_t> synth_n;
  synth->add_option("--corpus", synth_corpus, "Corpus JSONL with id and text fields")->required();
  synth->add_option("--n", synth_n, "Documents to sample (defaults to the configured N)");

  auto* variants = app.add_subcommand("variants", "Generate gold and emphasis-conditioned test texts");
  std::string variants_corpus;
  variants->add_option("--corpus", variants_corpus, "Corpus JSONL")->required();

  auto* learn = app.add_subcommand("learn", "Build the experience pools from the synthesized pairs");
  std::optional<std::size_t> stop_after;
  learn->add_option("--stop-after", stop_after, "Checkpoint and stop after this many pairs");

  auto* train = app.add_subcommand("train", "Fit the feature regression on the pools");

  auto* score = app.add_subcommand("score", "Score texts and write per-document reports");
  std::string score_texts;
  score->add_option("--texts", score_texts, "JSONL with id and text fields")->required();

  auto* eval = app.add_subcommand("eval", "Correlate reports with human ratings");
  std::string eval_human;
  std::optional<std::string> eval_variants;
  eval->add_option("--human", eval_human, "CSV with doc_id, rater_id, dimension, score")->required();
  eval->add_option("--variants", eval_variants, "Variants JSONL for the character-F1 baseline");

  auto* raters = app.add_subcommand("simulate-raters", "Write simulated expert ratings for a variants file");
  std::string raters_variants;
  std::string raters_out;
  std::size_t raters_count = 2;
  raters->add_option("--variants", raters_variants, "Variants JSONL")->required();
  raters->add_option("--out", raters_out, "Output CSV path")->required();
  raters->add_option("--raters", raters_count, "Number of raters")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  auto logger = spdlog::stderr_color_mt("legalstyle");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("%l: %v");
  spdlog::set_level(g.verbose ? spdlog::level::debug : g.quiet ? spdlog::level::err : spdlog::level::info);

  try {
    const PipelineConfig config = resolve_config(g);

    if (gen->parsed()) {
      write_file(gen_out, corpus_to_jsonl(generate_corpus(gen_docs, config.seed, gen_prefix)));
      spdlog::info("wrote {} documents to {}", gen_docs, gen_out);
      return 0;
    }
    if (raters->parsed()) {
      const auto catalog = FeatureCatalog::load(config.catalog_path());
      std::vector<RatedText> texts;
      for (const auto& v : read_variants_jsonl(raters_variants)) texts.push_back(RatedText{v.id, v.text, v.reference});
      const auto ratings = simulate_ratings(texts, raters_count, config.seed, find_lexicon(catalog, "legalese"));
      write_file(raters_out, ratings_to_csv(ratings));
      spdlog::info("wrote {} ratings to {}", ratings.size(), raters_out);
      return 0;
    }

    const RunLock lock(g.run_dir);
    Pipeline pipeline(config, g.run_dir);
    if (synth->parsed()) {
      const auto stats = pipeline.synth(synth_corpus, synth_n);
      std::printf("documents=%zu requested=%zu pairs=%zu skipped=%zu\n", stats.documents, stats.requested,
                  stats.pairs, stats.skipped);
    } else if (variants->parsed()) {
      std::printf("texts=%zu\n", pipeline.variants(variants_corpus));
    } else if (learn->parsed()) {
      const auto s = pipeline.learn(stop_after);
      std::printf("processed=%zu skipped=%zu dropped=%zu duplicates=%zu finalized=%s\n", s.pairs_processed,
                  s.pairs_skipped, s.issues_dropped, s.duplicates, s.finalized ? "yes" : "no");
    } else if (train->parsed()) {
      const auto model = pipeline.train();
      std::printf("k=%zu iterations=%d converged=%s\n", model.k(), model.iterations, model.converged ? "yes" : "no");
    } else if (score->parsed()) {
      const auto n = pipeline.score(score_texts);
      std::printf("scored=%zu reports=%s\n", n, (pipeline.run_dir() / "reports").c_str());
    } else if (eval->parsed()) {
      std::optional<fs::path> vpath;
      if (eval_variants) vpath = *eval_variants;
      std::cout << pipeline.eval(eval_human, vpath).to_table();
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
