// Acceptance checks. Each criterion prints one line:
//   criterion N PASS|FAIL|SKIP: details
// Run one with --criterion N, or all of them without arguments.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "xnlu/bio.hpp"
#include "xnlu/corpus.hpp"
#include "xnlu/crf.hpp"
#include "xnlu/error.hpp"
#include "xnlu/eval.hpp"
#include "xnlu/experiment.hpp"
#include "xnlu/gradcheck.hpp"
#include "xnlu/layers.hpp"
#include "xnlu/numeric.hpp"
#include "xnlu/seq2seq.hpp"
#include "xnlu/synthetic.hpp"
#include "xnlu/tagger.hpp"
#include "xnlu/transfer.hpp"

namespace fs = std::filesystem;
using namespace xnlu;

namespace {

struct Outcome {
  enum Status { pass, fail, skip } status;
  std::string detail;
};

// Exit status when every selected criterion was skipped.
constexpr int kSkipped = 77;

Outcome verdict(bool ok, const std::string& detail) { return {ok ? Outcome::pass : Outcome::fail, detail}; }

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

Tensor random_tensor(Shape shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

void randomize(ParameterList& params, Rng& rng, double scale = 0.5) {
  for (Parameter* p : params)
    for (double& v : p->value.values()) v = rng.uniform(-scale, scale);
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("xnlu-acceptance-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Largest |analytic - five-point stencil| over all entries, h = 1e-3.
double five_point_abs_error(const std::function<Var(Graph&)>& loss, ParameterList& params) {
  Gradients analytic(params);
  {
    Graph g;
    Var l = loss(g);
    g.backward(l);
    g.accumulate(analytic);
  }
  auto value = [&] {
    Graph g(false);
    return loss(g).scalar();
  };
  const double h = 1e-3;
  double worst = 0.0;
  for (Parameter* p : params)
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      auto at = [&](double d) {
        p->value[i] = saved + d;
        const double v = value();
        p->value[i] = saved;
        return v;
      };
      const double numeric = (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
      worst = std::max(worst, std::abs(analytic.slot(*p)[i] - numeric));
    }
  return worst;
}

// ---- 1: gradients ----------------------------------------------------------

Outcome gradients() {
  constexpr int kTrials = 20;
  std::map<std::string, double> worst, stencil;
  auto record = [&](const std::string& name, double err) { worst[name] = std::max(worst[name], err); };
  auto record_stencil = [&](const std::string& name, const std::function<Var(Graph&)>& loss, ParameterList& params) {
    stencil[name] = std::max(stencil[name], five_point_abs_error(loss, params));
  };
  Rng rng(101);

  for (int t = 0; t < kTrials; ++t) {
    LstmParams p = LstmParams::create("lstm", 3, 2, rng);
    Parameter x{"x", random_tensor({3}, rng)}, h{"h", random_tensor({2}, rng)}, c{"c", random_tensor({2}, rng)};
    ParameterList params{&x, &h, &c};
    p.collect(params);
    randomize(params, rng);
    record("lstm_step", grad_check(
                            [&](Graph& g) {
                              LstmState s = lstm_step(g, g.param(x), {g.param(h), g.param(c)}, p);
                              s = lstm_step(g, g.param(x), s, p);
                              return add(dot(s.h, s.h), sum(s.c));
                            },
                            params)
                            .max_relative_error);
  }
  for (int t = 0; t < kTrials; ++t) {
    BiLstmStack stack = BiLstmStack::create("enc", 2, 2, 2, 0.0, rng);
    Parameter x{"x", random_tensor({3, 2}, rng)};
    ParameterList params{&x};
    stack.collect(params);
    randomize(params, rng);
    record("bilstm", grad_check(
                         [&](Graph& g) {
                           Var hs = bilstm_encode(g, g.param(x), stack, false, nullptr);
                           return dot(row(hs, 0), row(hs, 2));
                         },
                         params)
                         .max_relative_error);
  }
  for (int t = 0; t < kTrials; ++t) {
    SelfAttentionParams p = SelfAttentionParams::create("att", 4, 3, rng);
    Parameter hs{"h", random_tensor({5, 4}, rng)}, probe{"probe", random_tensor({4}, rng)};
    ParameterList params{&hs, &probe};
    p.collect(params);
    randomize(params, rng);
    record("self_attention",
           grad_check([&](Graph& g) { return dot(self_attention(g, g.param(hs), p).context, g.param(probe)); },
                      params)
               .max_relative_error);
  }
  for (int t = 0; t < kTrials; ++t) {
    Parameter q{"q", random_tensor({3}, rng)}, k{"k", random_tensor({4, 3}, rng)}, probe{"p", random_tensor({3}, rng)};
    ParameterList params{&q, &k, &probe};
    record("dot_attention",
           grad_check([&](Graph& g) { return dot(dot_attention(g.param(q), g.param(k)).context, g.param(probe)); },
                      params)
               .max_relative_error);
  }
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t labels = 2 + rng.index(3), len = 1 + rng.index(4);
    CrfParams p = CrfParams::create("crf", labels);
    Parameter e{"e", random_tensor({len, labels}, rng, 2.0)};
    std::vector<std::size_t> gold(len);
    for (auto& y : gold) y = rng.index(labels);
    ParameterList params{&e};
    p.collect(params);
    randomize(params, rng, 1.0);
    record("crf_nll", grad_check([&](Graph& g) { return crf_nll(g, g.param(e), p, gold); }, params).max_relative_error);
  }

  const Corpus corpus{
      AnnotatedUtterance{"1", "en", {"a", "b", "c"}, "d1", "i1", {{1, 2, "s"}}},
      AnnotatedUtterance{"2", "en", {"c", "a"}, "d1", "i2", {{0, 2, "r"}}},
      AnnotatedUtterance{"3", "en", {"b"}, "d2", "i3", {}},
  };
  for (int t = 0; t < kTrials; ++t) {
    TaggerConfig c;
    c.hidden = 2;
    c.attention_dim = 2;
    c.seed = static_cast<std::uint64_t>(t);
    auto provider = std::make_shared<const EmbeddingProvider>(EmbeddingProvider::zero(tagger_vocabulary(corpus), 2));
    TaggerModel m = TaggerModel::create(Schema::infer(corpus), provider, c);
    const AnnotatedUtterance& u = corpus[static_cast<std::size_t>(t) % 2];
    JointModel& j = m.joint_for("d1");
    ParameterList params = j.parameters();
    ParameterList cls = m.classifier.parameters();
    params.insert(params.end(), cls.begin(), cls.end());
    randomize(params, rng);
    auto loss = [&](Graph& g) {
      return add(joint_loss(g, j, *provider, u, false, nullptr),
                 classifier_loss(g, m.classifier, *provider, u, false, nullptr));
    };
    record("tagger_loss", grad_check(loss, params).max_relative_error);
    record_stencil("tagger_loss", loss, params);
  }

  const std::vector<ParallelPair> pairs{{{"el", "perro", "negro"}, {"the", "black", "dog"}, {"es", "en"}},
                                        {{"un", "gato"}, {"a", "cat"}, {"es", "en"}}};
  for (int t = 0; t < kTrials; ++t) {
    Seq2SeqConfig c;
    c.embedding_dim = 3;
    c.encoder_hidden = 2;
    c.encoder_layers = 1 + static_cast<std::size_t>(t % 2);
    c.decoder_layers = 2 - static_cast<std::size_t>(t % 2);
    c.decoder_hidden = 3;
    c.mode = t % 3 == 0 ? EncoderMode::mult_cove_auto : EncoderMode::cove;
    Rng init(static_cast<std::uint64_t>(t));
    const auto expanded = expand_tasks(pairs, c.mode);
    Seq2SeqModel m = Seq2SeqModel::create(c, seq2seq_vocabulary(expanded, c), init);
    ParameterList params = m.parameters();
    randomize(params, rng);
    const ParallelPair& pair = expanded[static_cast<std::size_t>(t) % expanded.size()];
    std::vector<std::size_t> candidates{0, 1, 2, 3};
    for (const auto& w : pair.target) candidates.push_back(m.vocab.id(w));
    for (std::size_t i = 4; i < m.vocab.size(); i += 3) candidates.push_back(i);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    auto loss = [&](Graph& g) { return restricted_sequence_loss(g, m, pair, candidates, false, nullptr); };
    record("seq2seq_loss", grad_check(loss, params).max_relative_error);
    record_stencil("seq2seq_loss", loss, params);
  }

  bool ok = true;
  std::string detail;
  for (const auto& [name, err] : worst) {
    ok = ok && err < 1e-4;
    detail += (detail.empty() ? "" : ", ") + name + "=" + fmt(err, 3);
  }
  detail += "; max |analytic - five-point stencil|:";
  for (const auto& [name, err] : stencil) detail += " " + name + "=" + fmt(err, 3);
  return verdict(ok, "max central-difference relative error over " + std::to_string(kTrials) +
                         " instances each: " + detail);
}

// ---- 2: CRF ----------------------------------------------------------------

Outcome crf_exactness() {
  Rng rng(202);
  double worst_logz = 0.0, worst_grad = 0.0;
  std::size_t path_mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t len = 1 + rng.index(6), labels = 1 + rng.index(5);
    const CrfParams p = CrfParams::from_tensors(random_tensor({labels, labels}, rng, 2.0),
                                                random_tensor({labels}, rng, 2.0), random_tensor({labels}, rng, 2.0));
    const Tensor e = random_tensor({len, labels}, rng, 3.0);
    const auto brute = crf_brute_force(e, p);
    worst_logz = std::max(worst_logz, std::abs(crf_log_partition(e, p) - static_cast<double>(brute.log_partition)));
    if (viterbi_decode(e, p).labels != brute.best) ++path_mismatches;

    Parameter emissions{"e", e};
    std::vector<std::size_t> gold(len);
    for (auto& y : gold) y = rng.index(labels);
    Graph g;
    g.backward(crf_nll(g, g.param(emissions), p, gold));
    ParameterList params{&emissions};
    Gradients grads(params);
    g.accumulate(grads);
    for (std::size_t i = 0; i < len; ++i)
      for (std::size_t y = 0; y < labels; ++y)
        worst_grad = std::max(worst_grad, std::abs(grads.slot(emissions).at(i, y) - brute.marginals.at(i, y) +
                                                   (gold[i] == y ? 1.0 : 0.0)));
  }
  return verdict(worst_logz <= 1e-10 && path_mismatches == 0 && worst_grad <= 1e-8,
                 "200 instances: max |logZ - brute| = " + fmt(worst_logz, 3) + ", path mismatches = " +
                     std::to_string(path_mismatches) + ", max |grad - (marginal - gold)| = " + fmt(worst_grad, 3));
}

// ---- 3: metrics ------------------------------------------------------------

Outcome metric_oracles() {
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  {
    const std::vector<SlotSpan> gold{{1, 2, "dt"}}, pred{{1, 2, "dt"}, {3, 4, "loc"}};
    const auto r = slot_prf(gold, pred);
    check(r.precision == 0.5 && r.recall == 1.0 && std::abs(r.f1 - 2.0 / 3.0) < 1e-15, "P/R/F1 fixture");
    check(slot_prf({}, {}).f1 == 1.0, "empty/empty fixture");
  }
  {
    const Corpus gold{AnnotatedUtterance{"1", "en", {"a", "b"}, "d1", "i1", {{0, 1, "s"}}},
                      AnnotatedUtterance{"2", "en", {"c"}, "d1", "i2", {}},
                      AnnotatedUtterance{"3", "en", {"e", "f"}, "d2", "i3", {{1, 2, "t"}}}};
    std::vector<Prediction> p;
    for (const auto& u : gold) p.push_back({u.id, u.domain, u.intent, u.slots});
    p[2].slots = {{0, 2, "t"}};
    check(std::abs(exact_match_rate(gold, p) - 2.0 / 3.0) < 1e-15, "exact match 2/3 fixture");
  }
  {
    MetricCounts a, b;
    a.utterances = 2;
    a.exact_matches = 1;
    b.utterances = 4;
    b.exact_matches = 3;
    const std::vector<MetricCounts> parts{a, b};
    const double micro = micro_average(parts).exact_match;
    check(std::abs(micro - 4.0 / 6.0) < 1e-15 && micro != 0.625, "pooled 4/6 vs mean 0.625 fixture");
  }
  Rng rng(303);
  std::size_t violations = 0;
  const std::vector<std::string> domains{"d1", "d2"}, intents{"i1", "i2", "i3"}, labels{"x", "y"};
  auto random_spans = [&](std::size_t len) {
    std::vector<SlotSpan> spans;
    for (std::size_t i = 0; i < len;) {
      const std::size_t w = 1 + rng.index(2);
      if (i + w <= len && rng.uniform() < 0.4) spans.push_back({i, i + w, labels[rng.index(2)]});
      i += w;
    }
    return spans;
  };
  for (int set = 0; set < 1000; ++set) {
    Corpus gold;
    std::vector<Prediction> pred;
    const std::size_t n = 1 + rng.index(12);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t len = 1 + rng.index(6);
      AnnotatedUtterance u{std::to_string(i), "en", Sentence(len, "w"), domains[rng.index(2)], intents[rng.index(3)],
                           random_spans(len)};
      Prediction p{u.id, rng.uniform() < 0.7 ? u.domain : domains[rng.index(2)],
                   rng.uniform() < 0.7 ? u.intent : intents[rng.index(3)],
                   rng.uniform() < 0.6 ? u.slots : random_spans(len)};
      gold.push_back(std::move(u));
      pred.push_back(std::move(p));
    }
    const auto r = evaluate(gold, pred);
    if (r.exact_match > std::min(r.domain_accuracy, r.intent_accuracy) + 1e-15) ++violations;
  }
  check(violations == 0, std::to_string(violations) + " randomized sets violate exact <= min(domain, intent)");
  std::string detail = "P=0.5/R=1/F1=2/3, EM 2/3, micro 4/6 != 0.625, 1000 random sets";
  for (const auto& f : failures) detail += "; failed: " + f;
  return verdict(failures.empty(), detail);
}

// ---- 4: BIO and corpus -----------------------------------------------------

Outcome bio_properties() {
  Rng rng(404);
  const std::vector<std::string> labels{"a", "b", "c"};
  std::size_t round_trip_failures = 0, repair_failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t len = 1 + rng.index(12);
    std::vector<SlotSpan> spans;
    for (std::size_t i = 0; i < len;) {
      const std::size_t w = 1 + rng.index(3);
      if (i + w <= len && rng.uniform() < 0.5) spans.push_back({i, i + w, labels[rng.index(3)]});
      i += w;
    }
    if (bio_to_spans(spans_to_bio(spans, len)) != spans) ++round_trip_failures;
  }
  const std::vector<std::string> tags{"O", "B-a", "I-a", "B-b", "I-b"};
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::string> seq(1 + rng.index(12));
    for (auto& tag : seq) tag = tags[rng.index(tags.size())];
    try {
      const auto spans = bio_to_spans(seq);
      if (!spans_valid(spans, seq.size()) || bio_to_spans(spans_to_bio(spans, seq.size())) != spans)
        ++repair_failures;
    } catch (const std::exception&) {
      ++repair_failures;
    }
  }
  std::vector<Sentence> raw;
  const std::vector<std::string> words{"A", "a", "B", "b", "C"};
  for (int i = 0; i < 500; ++i) {
    Sentence s(1 + rng.index(4));
    for (auto& w : s) w = words[rng.index(words.size())];
    raw.push_back(s);
  }
  raw.push_back(Sentence(101, "w"));
  raw.push_back(Sentence(100, "v"));
  const auto once = preprocess_corpus(raw);
  const bool idempotent = preprocess_corpus(once) == once;
  bool dropped = true;
  bool kept = false;
  for (const auto& s : once) {
    if (s.size() > 100) dropped = false;
    if (s.size() == 100) kept = true;
  }
  return verdict(round_trip_failures == 0 && repair_failures == 0 && idempotent && dropped && kept,
                 "round-trip failures " + std::to_string(round_trip_failures) + "/1000, repair failures " +
                     std::to_string(repair_failures) + "/1000, preprocess idempotent=" + (idempotent ? "yes" : "no") +
                     ", 101-token sentence dropped=" + (dropped ? "yes" : "no") +
                     ", 100-token kept=" + (kept ? "yes" : "no"));
}

// ---- 5: tagger capacity ----------------------------------------------------

std::shared_ptr<const EmbeddingProvider> zero_provider(const Corpus& corpus, std::size_t dim) {
  return std::make_shared<const EmbeddingProvider>(EmbeddingProvider::zero(tagger_vocabulary(corpus), dim));
}

Outcome tagger_capacity() {
  SyntheticConfig sc;
  sc.seed = 5;
  const SyntheticGrammar grammar = make_grammar(sc);
  Rng rng(505);
  const Corpus small = generate_corpus(grammar, 50, rng, "small");

  TaggerConfig overfit;
  overfit.epochs = 60;
  overfit.dropout = 0.0;
  overfit.hidden = 32;
  overfit.attention_dim = 32;
  const auto fitted = train_tagger(small, small, zero_provider(small, 32), overfit);
  const double train_em = evaluate(small, predict_corpus(fitted.model, small)).exact_match;

  const Corpus train = generate_corpus(grammar, 500, rng, "train");
  const Corpus dev = generate_corpus(grammar, 200, rng, "dev");
  TaggerConfig recipe;  // 20 epochs, Adam 0.01, dropout 0.3, attention 128
  recipe.hidden = 64;
  const auto trained = train_tagger(train, dev, zero_provider(train, default_zero_dim(ProviderKind::zero)), recipe);
  const double dev_em = evaluate(dev, predict_corpus(trained.model, dev)).exact_match;
  return verdict(train_em == 1.0 && dev_em >= 0.9,
                 "50-utterance training exact match " + fmt(train_em) + " within " + std::to_string(overfit.epochs) +
                     " epochs (need 1.0); recipe dev exact match " + fmt(dev_em) + " on 200 dev utterances after 500 train (need >= 0.9)");
}

// ---- 6: encoder objectives -------------------------------------------------

Seq2SeqConfig toy_seq2seq(EncoderMode mode, std::size_t epochs) {
  Seq2SeqConfig c;
  c.mode = mode;
  c.embedding_dim = 32;
  c.encoder_hidden = 32;
  c.encoder_layers = 1;
  c.decoder_hidden = 64;
  c.decoder_layers = 1;
  c.batch_size = 8;
  c.learning_rate = 0.5;
  c.frequent_words = 50;
  c.max_epochs = epochs;
  c.seed = 6;
  return c;
}

std::string schedule_problem(const std::vector<EpochLog>& log) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log.size(); ++i) {
    const bool should_decay = log[i].selection_perplexity > best;
    if (log[i].decayed != should_decay) return "epoch " + std::to_string(log[i].epoch) + " decay flag is wrong";
    best = std::min(best, log[i].selection_perplexity);
    if (i > 0) {
      const double expected = log[i - 1].decayed ? log[i - 1].learning_rate * 0.99 : log[i - 1].learning_rate;
      if (log[i].learning_rate != expected) return "epoch " + std::to_string(log[i].epoch) + " lr is unexpected";
    }
  }
  return "";
}

Outcome encoder_objectives() {
  const auto all = substitution_parallel(50, 2200, 10, "es", "en", 66);
  const std::vector<ParallelPair> train(all.begin(), all.begin() + 2000), dev(all.begin() + 2000, all.end());
  std::vector<std::string> problems;
  std::string detail;
  std::size_t decays = 0;
  struct Run {
    EncoderMode mode;
    std::size_t epochs;
    double learning_rate;
  };
  for (const Run& run : {Run{EncoderMode::cove, 8, 0.5}, Run{EncoderMode::mult_cove, 10, 0.25},
                         Run{EncoderMode::mult_cove_auto, 5, 0.5}}) {
    const auto started = std::chrono::steady_clock::now();
    Seq2SeqConfig c = toy_seq2seq(run.mode, run.epochs);
    c.learning_rate = run.learning_rate;
    const auto dev_all = expand_tasks(dev, run.mode);
    const auto result = train_seq2seq(expand_tasks(train, run.mode), dev_all, c);
    const auto ppl = perplexity_by_task(result.model, dev_all);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    detail += (detail.empty() ? "" : "; ") + to_string(run.mode) + " (" + fmt(secs, 3) + "s):";
    for (const auto& [task, value] : ppl) {
      const bool autoencoder = !Task::parse(task).is_translation();
      const double limit = autoencoder ? 1.3 : 2.0;
      detail += " " + task + "=" + fmt(value);
      if (!(value < limit)) problems.push_back(to_string(run.mode) + " " + task + " perplexity " + fmt(value));
    }
    const std::string schedule = schedule_problem(result.log);
    if (!schedule.empty()) problems.push_back(to_string(run.mode) + ": " + schedule);
    for (const EpochLog& e : result.log) decays += e.decayed ? 1 : 0;
  }
  detail += "; lr decays observed " + std::to_string(decays) + ", all x0.99 on regressions";
  for (const auto& p : problems) detail += "; failed: " + p;
  return verdict(problems.empty(), detail);
}

// ---- 7: translate-train loop-back -----------------------------------------

Outcome translate_train_loopback() {
  SyntheticConfig sc;
  sc.seed = 7;
  const SyntheticGrammar grammar = make_grammar(sc);
  Rng rng(707);
  Corpus source = generate_corpus(grammar, 300, rng, "src", "xx");
  const Corpus test = generate_corpus(grammar, 200, rng, "test", "xx");
  const Corpus copy_text = generate_corpus(grammar, 1500, rng, "copy", "xx");

  // Copy pairs over shuffled utterance tokens.
  std::vector<ParallelPair> copy_train, copy_dev;
  Rng shuffle(99);
  for (std::size_t i = 0; i < copy_text.size(); ++i) {
    Sentence tokens = copy_text[i].tokens;
    for (std::size_t k = tokens.size(); k > 1; --k) std::swap(tokens[k - 1], tokens[shuffle.index(k)]);
    ParallelPair p{tokens, tokens, {"xx", "en"}};
    (i < 1400 ? copy_train : copy_dev).push_back(std::move(p));
  }
  Seq2SeqConfig c = toy_seq2seq(EncoderMode::cove, 10);
  c.source_language = "xx";
  c.frequent_words = 200;
  const auto copy = train_seq2seq(copy_train, copy_dev, c);

  const auto translated = make_translate_train_corpus(source, copy.model, {"xx", "en"});
  std::size_t identical = 0, diagonal = 0;
  for (const auto& u : translated.corpus) {
    const auto it = std::find_if(source.begin(), source.end(), [&](const auto& s) { return s.id == u.id; });
    if (u.tokens == it->tokens && u.slots == it->slots) ++identical;
  }
  for (const auto& u : source) {
    const Translation tr = translate_with_attention(copy.model, u.tokens, {"xx", "en"}, 1);
    bool diag = tr.tokens.size() == u.tokens.size();
    for (std::size_t t = 0; diag && t < tr.tokens.size(); ++t) diag = argmax(tr.attention.row(t)) == t;
    diagonal += diag ? 1 : 0;
  }
  const double identical_rate = static_cast<double>(identical) / static_cast<double>(source.size());

  const Corpus dev = generate_corpus(grammar, 100, rng, "dev", "xx");
  TaggerConfig tc;
  tc.hidden = 32;
  tc.attention_dim = 32;
  const auto original = train_tagger(source, dev, zero_provider(source, 32), tc);
  const auto projected = train_tagger(translated.corpus, dev, zero_provider(translated.corpus, 32), tc);
  const double em_original = evaluate(test, predict_corpus(original.model, test)).exact_match;
  const double em_projected = evaluate(test, predict_corpus(projected.model, test)).exact_match;
  const double gap = std::abs(em_original - em_projected);
  return verdict(identical_rate >= 0.95 && gap <= 0.02,
                 "copy model dev ppl " + fmt(copy.log[copy.best_epoch - 1].selection_perplexity) +
                     "; identical tokens+spans " + fmt(identical_rate) + " (need >= 0.95), diagonal attention " +
                     fmt(static_cast<double>(diagonal) / static_cast<double>(source.size())) + ", dropped " +
                     std::to_string(translated.dropped) + "; test exact match original " + fmt(em_original) +
                     " vs projected " + fmt(em_projected) + " (gap " + fmt(gap * 100, 3) + " points, need <= 2)");
}

// ---- 8: transfer ordering --------------------------------------------------

Outcome transfer_ordering() {
  double sums[3] = {0, 0, 0};
  const char* names[3] = {"zero_shot", "cross_lingual@10", "target_only"};
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScratchDir dir("c8-" + std::to_string(seed));
    SyntheticConfig sc;
    sc.seed = 800 + seed;
    sc.shared_slot_contexts = true;
    sc.values_per_slot = 12;
    const SyntheticGrammar grammar = make_grammar(sc);
    const WordMapping mapping = make_word_mapping(grammar.words(), "es", 900 + seed);
    Rng rng(seed, "c8-data");
    save_corpus(dir.file("en_train.jsonl"), generate_corpus(grammar, 300, rng, "en-train"));
    save_corpus(dir.file("en_dev.jsonl"), generate_corpus(grammar, 60, rng, "en-dev"));
    save_corpus(dir.file("es_train.jsonl"), translate_corpus(generate_corpus(grammar, 300, rng, "es-train"), mapping));
    save_corpus(dir.file("es_dev.jsonl"), translate_corpus(generate_corpus(grammar, 60, rng, "es-dev"), mapping));
    save_corpus(dir.file("es_test.jsonl"), translate_corpus(generate_corpus(grammar, 200, rng, "es-test"), mapping));

    ExperimentConfig base;
    base.seed = seed;
    base.tagger.seed = seed;
    base.tagger.hidden = 32;
    base.tagger.attention_dim = 32;
    base.tagger.epochs = 10;
    base.provider.zero_dim = 32;
    base.data.high_train = dir.file("en_train.jsonl");
    base.data.high_dev = dir.file("en_dev.jsonl");
    base.data.target_test = dir.file("es_test.jsonl");

    ExperimentConfig zero = base;
    zero.strategy = Strategy::zero_shot;
    zero.output_dir = dir.file("zero");
    ExperimentConfig cross = base;
    cross.strategy = Strategy::cross_lingual;
    cross.data.target_train = dir.file("es_train.jsonl");
    cross.sample_size = 10;
    cross.output_dir = dir.file("cross");
    ExperimentConfig full = base;
    full.strategy = Strategy::target_only;
    full.data.target_train = dir.file("es_train.jsonl");
    full.data.target_dev = dir.file("es_dev.jsonl");
    full.output_dir = dir.file("full");

    per_seed += (per_seed.empty() ? "" : " | ") + std::string("seed ") + std::to_string(seed) + ":";
    int k = 0;
    for (const ExperimentConfig* cfg : {&zero, &cross, &full}) {
      const double em = run_experiment(*cfg).metrics.exact_match;
      sums[k++] += em;
      per_seed += " " + fmt(em, 3);
    }
  }
  for (double& s : sums) s /= 5.0;
  std::string detail = "mean exact match over 5 seeds:";
  for (int k = 0; k < 3; ++k) detail += std::string(" ") + names[k] + "=" + fmt(sums[k]);
  return verdict(sums[0] < sums[1] && sums[1] < sums[2], detail + " (" + per_seed + ")");
}

// ---- 9: determinism and persistence ---------------------------------------

Outcome determinism() {
  ScratchDir dir("c9");
  SyntheticConfig sc;
  sc.seed = 9;
  const SyntheticGrammar grammar = make_grammar(sc);
  Rng rng(909);
  save_corpus(dir.file("train.jsonl"), generate_corpus(grammar, 60, rng, "train"));
  save_corpus(dir.file("dev.jsonl"), generate_corpus(grammar, 20, rng, "dev"));
  save_corpus(dir.file("test.jsonl"), generate_corpus(grammar, 30, rng, "test"));
  ExperimentConfig cfg;
  cfg.seed = 3;
  cfg.tagger.seed = 3;
  cfg.tagger.hidden = 8;
  cfg.tagger.attention_dim = 8;
  cfg.tagger.epochs = 3;
  cfg.provider.zero_dim = 8;
  cfg.data.target_train = dir.file("train.jsonl");
  cfg.data.target_dev = dir.file("dev.jsonl");
  cfg.data.target_test = dir.file("test.jsonl");
  cfg.output_dir = dir.file("run-a");
  run_experiment(cfg);
  cfg.output_dir = dir.file("run-b");
  run_experiment(cfg, false, {}, 2);
  const bool reports_equal = slurp(dir.file("run-a/report.json")) == slurp(dir.file("run-b/report.json"));

  const Corpus test = load_corpus(dir.file("test.jsonl"));
  const TaggerModel tagger = TaggerModel::load(dir.file("run-a/model.json"));
  tagger.save(dir.file("again.json"));
  const TaggerModel reloaded = TaggerModel::load(dir.file("again.json"));
  bool predictions_equal = predict_corpus(tagger, test) == predict_corpus(reloaded, test);
  for (const auto& u : test)
    predictions_equal =
        predictions_equal && classify_domain(tagger, u.tokens).probabilities == classify_domain(reloaded, u.tokens).probabilities;

  const auto all = substitution_parallel(20, 120, 6, "es", "en", 99);
  const std::vector<ParallelPair> train(all.begin(), all.begin() + 100), dev(all.begin() + 100, all.end());
  Seq2SeqConfig sc2 = toy_seq2seq(EncoderMode::mult_cove, 2);
  sc2.embedding_dim = 8;
  sc2.encoder_hidden = 8;
  sc2.decoder_hidden = 8;
  const auto s2s = train_seq2seq(expand_tasks(train, sc2.mode), expand_tasks(dev, sc2.mode), sc2);
  s2s.model.save(dir.file("s2s.json"));
  const Seq2SeqModel s2s_loaded = Seq2SeqModel::load(dir.file("s2s.json"));
  const auto dev_all = expand_tasks(dev, sc2.mode);
  bool seq2seq_equal = perplexity_by_task(s2s.model, dev_all) == perplexity_by_task(s2s_loaded, dev_all);
  for (const auto& p : dev) {
    const auto a = translate_with_attention(s2s.model, p.source, p.task, 2);
    const auto b = translate_with_attention(s2s_loaded, p.source, p.task, 2);
    seq2seq_equal = seq2seq_equal && a.tokens == b.tokens && a.attention == b.attention && a.score == b.score;
    seq2seq_equal = seq2seq_equal && encode_contextual(s2s.model, p.source) == encode_contextual(s2s_loaded, p.source);
  }
  return verdict(reports_equal && predictions_equal && seq2seq_equal,
                 std::string("report bytes identical (1 vs 2 threads)=") + (reports_equal ? "yes" : "no") +
                     ", tagger reload predictions identical=" + (predictions_equal ? "yes" : "no") +
                     ", seq2seq reload perplexities/translations identical=" + (seq2seq_equal ? "yes" : "no"));
}

// ---- 10: released dataset --------------------------------------------------

Outcome released_dataset() {
  const char* root = std::getenv("XNLU_DATASET_DIR");
  if (root == nullptr || *root == '\0')
    return {Outcome::skip, "not gating; set XNLU_DATASET_DIR to a directory with es/{train,dev,test}.jsonl"};
  const fs::path es = fs::path(root) / "es";
  const Corpus train = load_corpus((es / "train.jsonl").string());
  const Corpus dev = load_corpus((es / "dev.jsonl").string());
  const Corpus test = load_corpus((es / "test.jsonl").string());
  const bool counts_ok = train.size() == 3617 && dev.size() == 1983 && test.size() == 3043;
  std::string detail = "utterances " + std::to_string(train.size()) + "/" + std::to_string(dev.size()) + "/" +
                       std::to_string(test.size()) + " (expected 3617/1983/3043)";
  std::vector<double> runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ScratchDir dir("c10-" + std::to_string(seed));
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.tagger.seed = seed;
    cfg.data.target_train = (es / "train.jsonl").string();
    cfg.data.target_dev = (es / "dev.jsonl").string();
    cfg.data.target_test = (es / "test.jsonl").string();
    cfg.output_dir = dir.file("run");
    runs.push_back(run_experiment(cfg).metrics.exact_match * 100.0);
  }
  const auto s = summarize(runs);
  const double gap = s.average - 72.94;
  detail += "; target-only zero-embedding exact match " + fmt(s.average) + " (min " + fmt(s.minimum) + ", max " +
            fmt(s.maximum) + "), gap to 72.94 = " + fmt(gap, 3) + " points";
  return verdict(counts_ok && std::abs(gap) <= 3.0, detail);
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria{gradients,          crf_exactness,       metric_oracles,
                                                       bio_properties,     tagger_capacity,     encoder_objectives,
                                                       translate_train_loopback, transfer_ordering, determinism,
                                                       released_dataset};
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected.push_back(std::stoul(argv[++i]));
    } else {
      std::cerr << "usage: xnlu_acceptance [--criterion N]...\n";
      return 2;
    }
  }
  if (selected.empty())
    for (std::size_t n = 1; n <= criteria.size(); ++n) selected.push_back(n);

  bool all_ok = true;
  bool all_skipped = true;
  for (std::size_t n : selected) {
    if (n < 1 || n > criteria.size()) {
      std::cerr << "no criterion " << n << '\n';
      return 2;
    }
    Outcome o;
    try {
      o = criteria[n - 1]();
    } catch (const std::exception& e) {
      o = {Outcome::fail, std::string("exception: ") + e.what()};
    }
    const char* status = o.status == Outcome::pass ? "PASS" : o.status == Outcome::skip ? "SKIP" : "FAIL";
    std::cout << "criterion " << n << ' ' << status << ": " << o.detail << std::endl;
    all_ok = all_ok && o.status != Outcome::fail;
    all_skipped = all_skipped && o.status == Outcome::skip;
  }
  if (!all_ok) return 1;
  return all_skipped ? kSkipped : 0;
}
