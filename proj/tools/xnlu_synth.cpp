#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>

#include "xnlu/checkpoint.hpp"
#include "xnlu/corpus.hpp"
#include "xnlu/error.hpp"
#include "xnlu/random.hpp"
#include "xnlu/seq2seq.hpp"
#include "xnlu/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace xnlu;

namespace {

void write_corpus(const fs::path& path, const Corpus& corpus) { save_corpus(path.string(), corpus); }

int cmd_nlu(const SyntheticConfig& config, std::size_t train, std::size_t dev, std::size_t test,
            const std::string& language, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const SyntheticGrammar grammar = make_grammar(config);
  Rng rng(config.seed, "synthetic");
  write_corpus(fs::path(out_dir) / "train.jsonl", generate_corpus(grammar, train, rng, language + "-train-", language));
  write_corpus(fs::path(out_dir) / "dev.jsonl", generate_corpus(grammar, dev, rng, language + "-dev-", language));
  write_corpus(fs::path(out_dir) / "test.jsonl", generate_corpus(grammar, test, rng, language + "-test-", language));
  write_json_file((fs::path(out_dir) / "schema.json").string(), grammar.schema().to_json());
  return 0;
}

// Maps every word of the given corpora into an invented language and writes
// the mapped corpora next to a word-aligned parallel file.
int cmd_translate_corpus(const std::vector<std::string>& inputs, const std::string& language, std::uint64_t seed,
                         const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<Corpus> corpora;
  std::set<std::string> vocabulary;
  for (const std::string& path : inputs) {
    corpora.push_back(load_corpus(path));
    for (const AnnotatedUtterance& u : corpora.back()) vocabulary.insert(u.tokens.begin(), u.tokens.end());
  }
  const WordMapping mapping = make_word_mapping({vocabulary.begin(), vocabulary.end()}, language, seed);
  std::vector<ParallelPair> pairs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Corpus mapped = translate_corpus(corpora[i], mapping);
    write_corpus(fs::path(out_dir) / fs::path(inputs[i]).filename(), mapped);
    for (std::size_t k = 0; k < mapped.size(); ++k)
      pairs.push_back({corpora[i][k].tokens, mapped[k].tokens, {corpora[i][k].language, language}});
  }
  save_parallel((fs::path(out_dir) / "parallel.jsonl").string(), pairs);
  json words = json::object();
  for (const auto& [from, to] : mapping.words) words[from] = to;
  write_json_file((fs::path(out_dir) / "mapping.json").string(), {{"language", language}, {"words", words}});
  return 0;
}

int cmd_parallel(std::size_t vocab, std::size_t pairs, std::size_t dev, std::size_t max_length,
                 const std::string& source, const std::string& target, std::uint64_t seed, const std::string& output,
                 const std::string& dev_output) {
  require(dev == 0 || !dev_output.empty(), "--dev needs --dev-output");
  auto all = substitution_parallel(vocab, pairs + dev, max_length, source, target, seed);
  const auto split = all.begin() + static_cast<std::ptrdiff_t>(pairs);
  save_parallel(output, std::vector<ParallelPair>(all.begin(), split));
  if (dev > 0) save_parallel(dev_output, std::vector<ParallelPair>(split, all.end()));
  return 0;
}

int fail(const char* type, const std::string& message, int code) {
  std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic data for cross-lingual NLU experiments"};
  app.require_subcommand(1);

  SyntheticConfig cfg;
  std::size_t n_train = 500, n_dev = 100, n_test = 200;
  std::string nlu_language = "en", nlu_out;
  auto* nlu = app.add_subcommand("nlu", "Generate annotated train/dev/test corpora and a schema");
  nlu->add_option("--domains", cfg.domains);
  nlu->add_option("--intents", cfg.intents_per_domain, "Intents per domain");
  nlu->add_option("--slot-types", cfg.slot_types_per_domain, "Slot types per domain");
  nlu->add_option("--values", cfg.values_per_slot, "Values per slot type");
  nlu->add_option("--max-value-length", cfg.max_value_length);
  nlu->add_option("--templates", cfg.templates_per_intent, "Templates per intent");
  nlu->add_option("--fillers", cfg.filler_words, "Filler words per domain");
  nlu->add_flag("--shared-slot-contexts", cfg.shared_slot_contexts, "Slot types share their carrier words");
  nlu->add_option("--train", n_train);
  nlu->add_option("--dev", n_dev);
  nlu->add_option("--test", n_test);
  nlu->add_option("--language", nlu_language);
  nlu->add_option("--seed", cfg.seed);
  nlu->add_option("-o,--output-dir", nlu_out)->required();

  std::vector<std::string> tc_inputs;
  std::string tc_language = "xx", tc_out;
  std::uint64_t tc_seed = 0;
  auto* tc = app.add_subcommand("translate-corpus", "Map corpora into an invented language word by word");
  tc->add_option("-i,--input", tc_inputs)->required()->check(CLI::ExistingFile);
  tc->add_option("--language", tc_language);
  tc->add_option("--seed", tc_seed);
  tc->add_option("-o,--output-dir", tc_out)->required();

  std::size_t p_vocab = 50, p_pairs = 2000, p_dev = 0, p_len = 10;
  std::string p_source = "es", p_target = "en", p_out, p_dev_out;
  std::uint64_t p_seed = 0;
  auto* parallel = app.add_subcommand("parallel", "Token-substitution parallel data");
  parallel->add_option("--vocab", p_vocab);
  parallel->add_option("--pairs", p_pairs);
  parallel->add_option("--dev", p_dev, "Extra pairs from the same language pair, written separately");
  parallel->add_option("--dev-output", p_dev_out);
  parallel->add_option("--max-length", p_len);
  parallel->add_option("--source", p_source);
  parallel->add_option("--target", p_target);
  parallel->add_option("--seed", p_seed);
  parallel->add_option("-o,--output", p_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), 2);
  }
  try {
    if (*nlu) return cmd_nlu(cfg, n_train, n_dev, n_test, nlu_language, nlu_out);
    if (*tc) return cmd_translate_corpus(tc_inputs, tc_language, tc_seed, tc_out);
    if (*parallel) return cmd_parallel(p_vocab, p_pairs, p_dev, p_len, p_source, p_target, p_seed, p_out, p_dev_out);
  } catch (const PreconditionError& e) {
    return fail("precondition", e.what(), 2);
  } catch (const DataError& e) {
    return fail("data", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 1;
}
