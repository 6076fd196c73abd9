#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "helpers.hpp"

namespace {

using xnlu::testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(const std::string& binary, const std::string& args, const TempDir& dir) {
  const std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
  const int status = std::system((binary + " " + args + " >" + out + " 2>" + err).c_str());
  auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

Outcome xnlu(const std::string& args, const TempDir& dir) { return run(XNLU_CLI_PATH, args, dir); }
Outcome synth(const std::string& args, const TempDir& dir) { return run(XNLU_SYNTH_PATH, args, dir); }

TEST(Cli, UsageErrorsAreJson) {
  TempDir dir("cli");
  const Outcome o = xnlu("train-tagger --bogus", dir);
  EXPECT_EQ(o.code, 2);
  const auto j = nlohmann::json::parse(o.err);
  EXPECT_EQ(j["error"]["type"], "usage");
}

TEST(Cli, MissingInputIsAPreconditionError) {
  TempDir dir("cli");
  const Outcome o = xnlu("evaluate --predictions " + dir.file("none.jsonl") + " --test " + dir.file("none.jsonl"), dir);
  EXPECT_EQ(o.code, 2);
  EXPECT_TRUE(nlohmann::json::parse(o.err)["error"].contains("message"));
}

TEST(Cli, MalformedCorpusNamesTheLine) {
  TempDir dir("cli");
  std::ofstream(dir.file("bad.jsonl")) << "{\"id\": 1}\n";
  const Outcome o = xnlu("prepare --format corpus -i " + dir.file("bad.jsonl"), dir);
  EXPECT_EQ(o.code, 2);
  const auto j = nlohmann::json::parse(o.err);
  EXPECT_EQ(j["error"]["type"], "data");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("bad.jsonl:1"), std::string::npos);
}

TEST(Cli, PrepareTokenizesText) {
  TempDir dir("cli");
  std::ofstream(dir.file("raw.txt")) << "Set an alarm at 7am.\n";
  const Outcome o = xnlu("prepare --format text -i " + dir.file("raw.txt") + " --language en", dir);
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(nlohmann::json::parse(o.out)["tokens"],
            nlohmann::json({"set", "an", "alarm", "at", "7am", "."}));
}

TEST(Cli, TrainTaggerThenEvaluate) {
  TempDir dir("cli");
  const std::string data = dir.file("data");
  ASSERT_EQ(synth("nlu --train 40 --dev 10 --test 10 --seed 3 -o " + data, dir).code, 0);
  const Outcome train = xnlu("train-tagger --train " + data + "/train.jsonl --dev " + data +
                                 "/dev.jsonl --zero-dim 8 --hidden 8 --attention-dim 4 --epochs 2 -o " +
                                 dir.file("tagger.json") + " --history " + dir.file("history.json"),
                             dir);
  ASSERT_EQ(train.code, 0) << train.err;
  const Outcome eval =
      xnlu("evaluate -m " + dir.file("tagger.json") + " --test " + data + "/test.jsonl --write-predictions " +
               dir.file("pred.jsonl"),
           dir);
  ASSERT_EQ(eval.code, 0) << eval.err;
  const auto report = nlohmann::json::parse(eval.out);
  EXPECT_EQ(report["counts"]["utterances"], 10);
  const Outcome again = xnlu("evaluate --predictions " + dir.file("pred.jsonl") + " --test " + data + "/test.jsonl", dir);
  ASSERT_EQ(again.code, 0) << again.err;
  EXPECT_EQ(nlohmann::json::parse(again.out), report);
}

TEST(Cli, AlignAndTranslate) {
  TempDir dir("cli");
  ASSERT_EQ(synth("parallel --vocab 10 --pairs 60 --dev 10 --dev-output " + dir.file("dev.jsonl") +
                      " --max-length 4 --seed 2 -o " + dir.file("train.jsonl"),
                  dir)
                .code,
            0);
  ASSERT_EQ(xnlu("align -i " + dir.file("train.jsonl") + " -o " + dir.file("lex.json"), dir).code, 0);
  std::ifstream lex(dir.file("lex.json"));
  EXPECT_FALSE(nlohmann::json::parse(lex).empty());
  const Outcome train = xnlu("train-encoder --train " + dir.file("train.jsonl") + " --dev " + dir.file("dev.jsonl") +
                                 " --embedding-dim 8 --encoder-hidden 4 --encoder-layers 1 --decoder-hidden 8"
                                 " --decoder-layers 1 --epochs 1 -o " +
                                 dir.file("enc.json"),
                             dir);
  ASSERT_EQ(train.code, 0) << train.err;
  std::ofstream(dir.file("in.jsonl")) << R"({"id":"a","tokens":["x"]})" << '\n';
  const Outcome tr = xnlu("translate -m " + dir.file("enc.json") + " -i " + dir.file("in.jsonl") +
                              " --task 'es->en' --emit-attention -o " + dir.file("out.jsonl"),
                          dir);
  ASSERT_EQ(tr.code, 0) << tr.err;
  std::ifstream out(dir.file("out.jsonl"));
  std::string line;
  ASSERT_TRUE(std::getline(out, line));
  const auto j = nlohmann::json::parse(line);
  EXPECT_EQ(j["id"], "a");
  EXPECT_EQ(j["attention"].size(), j["tokens"].size());
}

}  // namespace
