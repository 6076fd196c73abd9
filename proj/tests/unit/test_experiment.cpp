#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "xnlu/error.hpp"
#include "xnlu/experiment.hpp"
#include "xnlu/synthetic.hpp"

namespace xnlu {
namespace {

using testing::TempDir;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// High-resource English data plus a word-mapped target language.
struct Fixture {
  TempDir dir{"experiment"};
  ExperimentConfig config;

  Fixture() {
    SyntheticConfig sc;
    sc.seed = 11;
    const SyntheticGrammar grammar = make_grammar(sc);
    const WordMapping mapping = make_word_mapping(grammar.words(), "es", 12);
    Rng rng(13);
    save_corpus(dir.file("en_train.jsonl"), generate_corpus(grammar, 40, rng, "en-train"));
    save_corpus(dir.file("en_dev.jsonl"), generate_corpus(grammar, 10, rng, "en-dev"));
    save_corpus(dir.file("es_train.jsonl"), translate_corpus(generate_corpus(grammar, 60, rng, "es-train"), mapping));
    save_corpus(dir.file("es_dev.jsonl"), translate_corpus(generate_corpus(grammar, 10, rng, "es-dev"), mapping));
    save_corpus(dir.file("es_test.jsonl"), translate_corpus(generate_corpus(grammar, 20, rng, "es-test"), mapping));
    config.data.high_train = dir.file("en_train.jsonl");
    config.data.high_dev = dir.file("en_dev.jsonl");
    config.data.target_train = dir.file("es_train.jsonl");
    config.data.target_dev = dir.file("es_dev.jsonl");
    config.data.target_test = dir.file("es_test.jsonl");
    config.provider.zero_dim = 8;
    config.tagger.hidden = 8;
    config.tagger.attention_dim = 4;
    config.tagger.epochs = 2;
    config.seed = 5;
    config.tagger.seed = 5;
  }

  std::string out(const std::string& name) const { return dir.file(name); }
};

TEST(ExperimentConfig, JsonRoundTrip) {
  Fixture f;
  f.config.output_dir = f.out("run");
  f.config.sample_size = 10;
  EXPECT_EQ(ExperimentConfig::from_json(f.config.to_json()), f.config);
  const auto j = f.config.to_json();
  EXPECT_EQ(j["provider"]["zero_dim"], 8);
  EXPECT_EQ(j["sample_size"], 10);
}

TEST(ExperimentConfig, Validation) {
  Fixture f;
  EXPECT_THROW(f.config.validate(), PreconditionError);  // no output_dir
  f.config.output_dir = f.out("run");
  EXPECT_NO_THROW(f.config.validate());
  f.config.strategy = Strategy::zero_shot;
  EXPECT_THROW(f.config.validate(), PreconditionError);
  f.config.data.target_train.clear();
  EXPECT_NO_THROW(f.config.validate());
  f.config.strategy = Strategy::translate_train;
  EXPECT_THROW(f.config.validate(), PreconditionError);  // no translation model
  f.config.strategy = Strategy::target_only;
  f.config.data.target_train = f.out("missing.jsonl");
  EXPECT_THROW(f.config.validate(), PreconditionError);
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"strategy":"nope"})")), PreconditionError);
  EXPECT_THROW(ExperimentConfig::from_json(nlohmann::json::parse(R"({"repeats":"many"})")), DataError);
}

TEST(RunExperiment, ByteIdenticalAcrossRuns) {
  Fixture f;
  f.config.strategy = Strategy::cross_lingual;
  f.config.output_dir = f.out("a");
  const ExperimentReport a = run_experiment(f.config);
  f.config.output_dir = f.out("b");
  run_experiment(f.config);
  EXPECT_EQ(slurp(f.out("a") + "/report.json"), slurp(f.out("b") + "/report.json"));
  EXPECT_TRUE(std::filesystem::exists(f.out("a") + "/model.json"));
  EXPECT_TRUE(std::filesystem::exists(f.out("a") + "/manifest.json"));
  EXPECT_EQ(a.metrics.counts.utterances, 20u);
  EXPECT_EQ(a.shards.size(), 1u);
}

TEST(RunExperiment, RefusesNonEmptyOutputWithoutForce) {
  Fixture f;
  f.config.output_dir = f.out("busy");
  std::filesystem::create_directories(f.config.output_dir);
  std::ofstream(f.config.output_dir + "/stale.txt") << "x";
  EXPECT_THROW(run_experiment(f.config), PreconditionError);
  EXPECT_NO_THROW(run_experiment(f.config, true));
}

TEST(RunExperiment, LearningCurveShardsIgnoreThreadCount) {
  Fixture f;
  f.config.sample_size = 10;
  f.config.repeats = 2;
  f.config.output_dir = f.out("one");
  const ExperimentReport one = run_experiment(f.config, false, {}, 1);
  f.config.output_dir = f.out("two");
  const ExperimentReport two = run_experiment(f.config, false, {}, 2);
  ASSERT_EQ(one.shards.size(), 2u);
  EXPECT_EQ(one.shards[0].train_utterances, 10u * count_by_domain(load_corpus(f.config.data.target_train)).size());
  EXPECT_NE(one.shards[0].seed, one.shards[1].seed);
  EXPECT_EQ(slurp(f.out("one") + "/report.json"), slurp(f.out("two") + "/report.json"));
  EXPECT_TRUE(std::filesystem::exists(f.out("one") + "/model-1.json"));
}

TEST(AverageReports, RatesAveragedCountsSummed) {
  MetricReport a, b;
  a.exact_match = 0.5;
  b.exact_match = 1.0;
  a.counts.utterances = 2;
  b.counts.utterances = 10;
  const auto r = average_reports({a, b});
  EXPECT_DOUBLE_EQ(r.exact_match, 0.75);
  EXPECT_EQ(r.counts.utterances, 12u);
  EXPECT_THROW(average_reports({}), PreconditionError);
}

}  // namespace
}  // namespace xnlu
