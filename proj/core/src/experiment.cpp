#include "xnlu/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

#include "xnlu/checkpoint.hpp"
#include "xnlu/error.hpp"

namespace xnlu {

namespace fs = std::filesystem;

// ---- config --------------------------------------------------------------

namespace {

void require_file(const std::string& path, const std::string& what) {
  require(!path.empty(), what + " is required for this configuration");
  require(fs::is_regular_file(path), what + " '" + path + "' does not exist");
}

void optional_file(const std::string& path, const std::string& what) {
  if (!path.empty()) require_file(path, what);
}

}  // namespace

void ExperimentConfig::validate() const {
  tagger.validate();
  plan().validate();
  require(!output_dir.empty(), "output_dir is required");
  require(!high_language.empty() && !target_language.empty(), "languages must be named");
  require(vocab_cap >= 1, "vocab_cap must be at least 1");
  require(translation.beam >= 1, "translation beam must be at least 1");
  require_file(data.target_test, "data.target_test");
  optional_file(data.schema, "data.schema");
  optional_file(data.high_dev, "data.high_dev");
  optional_file(data.target_dev, "data.target_dev");

  switch (strategy) {
    case Strategy::target_only:
      require_file(data.target_train, "data.target_train");
      if (!sample_size) require_file(data.target_dev, "data.target_dev");
      break;
    case Strategy::cross_lingual:
      require_file(data.high_train, "data.high_train");
      require_file(data.target_train, "data.target_train");
      if (!sample_size) require_file(data.target_dev, "data.target_dev");
      break;
    case Strategy::translate_train:
      require_file(data.high_train, "data.high_train");
      require_file(translation.model, "translation.model");
      optional_file(data.target_train, "data.target_train");
      if (sample_size) require(!data.target_train.empty(), "a sample size needs data.target_train");
      if (!sample_size && data.target_dev.empty()) require_file(data.high_dev, "data.high_dev");
      break;
    case Strategy::zero_shot:
      require(data.target_train.empty(), "zero_shot forbids target-language training data (data.target_train)");
      require_file(data.high_train, "data.high_train");
      require_file(data.high_dev, "data.high_dev");
      break;
  }
  switch (provider.kind) {
    case ProviderKind::zero:
      break;
    case ProviderKind::static_concat:
      require_file(provider.static_vectors, "provider.static_vectors");
      break;
    case ProviderKind::encoder_concat:
      require_file(provider.encoder, "provider.encoder");
      break;
  }
}

TransferPlan ExperimentConfig::plan() const {
  TransferPlan p;
  p.strategy = strategy;
  p.provider = provider.kind;
  p.sample_size = sample_size;
  p.repeats = repeats;
  p.seed = seed;
  return p;
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"strategy", to_string(strategy)},
          {"seed", seed},
          {"output_dir", output_dir},
          {"languages", {{"high", high_language}, {"target", target_language}}},
          {"data",
           {{"high_train", data.high_train},
            {"high_dev", data.high_dev},
            {"target_train", data.target_train},
            {"target_dev", data.target_dev},
            {"target_test", data.target_test},
            {"schema", data.schema}}},
          {"provider",
           {{"kind", to_string(provider.kind)},
            {"static_vectors", provider.static_vectors},
            {"encoder", provider.encoder},
            {"zero_dim", provider.zero_dim == 0 ? default_zero_dim(provider.kind) : provider.zero_dim}}},
          {"translation", {{"model", translation.model}, {"beam", translation.beam}}},
          {"tagger", tagger.to_json()},
          {"sample_size", sample_size ? nlohmann::json(*sample_size) : nlohmann::json("all")},
          {"repeats", repeats},
          {"vocab_cap", vocab_cap}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    require(j.is_object(), "experiment config must be a JSON object");
    c.strategy = parse_strategy(j.value("strategy", to_string(c.strategy)));
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("languages")) {
      c.high_language = j["languages"].value("high", c.high_language);
      c.target_language = j["languages"].value("target", c.target_language);
    }
    if (j.contains("data")) {
      const auto& d = j["data"];
      c.data.high_train = d.value("high_train", "");
      c.data.high_dev = d.value("high_dev", "");
      c.data.target_train = d.value("target_train", "");
      c.data.target_dev = d.value("target_dev", "");
      c.data.target_test = d.value("target_test", "");
      c.data.schema = d.value("schema", "");
    }
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      c.provider.kind = parse_provider_kind(p.value("kind", to_string(c.provider.kind)));
      c.provider.static_vectors = p.value("static_vectors", "");
      c.provider.encoder = p.value("encoder", "");
      c.provider.zero_dim = p.value("zero_dim", std::size_t{0});
    }
    if (j.contains("translation")) {
      c.translation.model = j["translation"].value("model", "");
      c.translation.beam = j["translation"].value("beam", c.translation.beam);
    }
    if (j.contains("tagger")) c.tagger = TaggerConfig::from_json(j["tagger"]);
    if (j.contains("sample_size") && !j["sample_size"].is_null() &&
        !(j["sample_size"].is_string() && j["sample_size"] == "all"))
      c.sample_size = j["sample_size"].get<std::size_t>();
    c.repeats = j.value("repeats", c.repeats);
    c.vocab_cap = j.value("vocab_cap", c.vocab_cap);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed experiment config: ") + e.what());
  }
  // The tagger's own seed follows the experiment seed.
  c.tagger.seed = c.seed;
  if (c.provider.zero_dim == default_zero_dim(c.provider.kind)) c.provider.zero_dim = 0;
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) { return from_json(read_json_file(path)); }

// ---- report --------------------------------------------------------------

MetricReport average_reports(const std::vector<MetricReport>& reports) {
  require(!reports.empty(), "no reports to average");
  MetricReport out;
  const double n = static_cast<double>(reports.size());
  for (const MetricReport& r : reports) {
    out.exact_match += r.exact_match / n;
    out.domain_accuracy += r.domain_accuracy / n;
    out.intent_accuracy += r.intent_accuracy / n;
    out.slot_precision += r.slot_precision / n;
    out.slot_recall += r.slot_recall / n;
    out.slot_f1 += r.slot_f1 / n;
    out.counts += r.counts;
    out.undefined_rates = out.undefined_rates || r.undefined_rates;
  }
  return out;
}

nlohmann::ordered_json ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["metadata"] = metadata;
  j["metrics"] = metrics.to_json();
  j["exact_match_summary"] = {{"average", exact_match.average},
                              {"minimum", exact_match.minimum},
                              {"maximum", exact_match.maximum}};
  j["translation_dropped"] = translation_dropped;
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const RunShard& s : shards) {
    nlohmann::ordered_json sj;
    sj["repeat"] = s.repeat;
    sj["seed"] = s.seed;
    sj["train_utterances"] = s.train_utterances;
    sj["selection_utterances"] = s.selection_utterances;
    sj["metrics"] = s.metrics.to_json();
    sj["history"] = s.history.to_json();
    list.push_back(std::move(sj));
  }
  j["shards"] = std::move(list);
  return j;
}

// ---- runner --------------------------------------------------------------

namespace {

const char* const kArtifacts[] = {"report.json", "manifest.json"};

void prepare_output(const std::string& dir, bool force) {
  if (fs::exists(dir)) {
    require(fs::is_directory(dir), "output path '" + dir + "' is not a directory");
    if (!fs::is_empty(dir)) {
      require(force, "output directory '" + dir + "' is not empty (use --force to overwrite)");
      for (const char* name : kArtifacts) fs::remove(fs::path(dir) / name);
      for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("model", 0) == 0 && entry.path().extension() == ".json") fs::remove(entry.path());
      }
    }
  } else {
    fs::create_directories(dir);
  }
}

Corpus load_optional(const std::string& path, const Schema* schema) {
  return path.empty() ? Corpus{} : load_corpus(path, schema);
}

std::shared_ptr<const EmbeddingProvider> make_provider(const ExperimentConfig& c, const Corpus& train,
                                                       const std::shared_ptr<const StaticVectors>& vectors,
                                                       const std::shared_ptr<const Seq2SeqModel>& encoder) {
  const std::size_t zero_dim = c.provider.zero_dim == 0 ? default_zero_dim(c.provider.kind) : c.provider.zero_dim;
  Vocabulary vocab = tagger_vocabulary(train, c.vocab_cap);
  switch (c.provider.kind) {
    case ProviderKind::static_concat:
      return std::make_shared<const EmbeddingProvider>(EmbeddingProvider::with_static(std::move(vocab), zero_dim, vectors));
    case ProviderKind::encoder_concat:
      return std::make_shared<const EmbeddingProvider>(EmbeddingProvider::with_encoder(std::move(vocab), zero_dim, encoder));
    case ProviderKind::zero:
      break;
  }
  return std::make_shared<const EmbeddingProvider>(EmbeddingProvider::zero(std::move(vocab), zero_dim));
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, bool force, const ProgressFn& progress,
                                std::size_t threads) {
  config.validate();
  prepare_output(config.output_dir, force);
  auto say = [&](const std::string& m) {
    if (progress) progress(m);
  };

  std::optional<Schema> schema;
  if (!config.data.schema.empty()) schema = Schema::load(config.data.schema);
  const Schema* sp = schema ? &*schema : nullptr;
  const Corpus high_train = load_optional(config.data.high_train, sp);
  const Corpus high_dev = load_optional(config.data.high_dev, sp);
  const Corpus target_train = load_optional(config.data.target_train, sp);
  const Corpus target_dev = load_optional(config.data.target_dev, sp);
  const Corpus target_test = load_corpus(config.data.target_test, sp);
  require(!target_test.empty(), "target test set is empty");

  std::shared_ptr<const StaticVectors> vectors;
  std::shared_ptr<const Seq2SeqModel> encoder;
  if (config.provider.kind == ProviderKind::static_concat)
    vectors = std::make_shared<const StaticVectors>(StaticVectors::load(config.provider.static_vectors));
  if (config.provider.kind == ProviderKind::encoder_concat)
    encoder = std::make_shared<const Seq2SeqModel>(Seq2SeqModel::load(config.provider.encoder));

  ExperimentReport report;
  Corpus translated_train, translated_dev;
  if (config.strategy == Strategy::translate_train) {
    say("translating the high-resource data");
    const Seq2SeqModel mt = Seq2SeqModel::load(config.translation.model);
    const Task task{config.high_language, config.target_language};
    auto tr = make_translate_train_corpus(high_train, mt, task, config.translation.beam);
    translated_train = std::move(tr.corpus);
    report.translation_dropped = tr.dropped;
    require(!translated_train.empty(), "every translation came out empty");
    if (!config.sample_size && target_dev.empty()) {
      auto dv = make_translate_train_corpus(high_dev, mt, task, config.translation.beam);
      translated_dev = std::move(dv.corpus);
      report.translation_dropped += dv.dropped;
    }
  }

  // Training and selection sets per shard.
  struct ShardData {
    Corpus train;
    Corpus selection;
  };
  std::vector<ShardData> shard_data;
  auto compose = [&](const Corpus& target_part, const Corpus& selection, std::uint64_t seed) {
    ShardData s;
    switch (config.strategy) {
      case Strategy::target_only:
        s.train = target_part;
        break;
      case Strategy::cross_lingual:
        s.train = mix_and_upsample(high_train, target_part, seed);
        break;
      case Strategy::translate_train:
        s.train = target_part.empty() ? translated_train : mix_and_upsample(translated_train, target_part, seed);
        break;
      case Strategy::zero_shot:
        s.train = mix_and_upsample(high_train, {}, seed, Strategy::zero_shot);
        break;
    }
    s.selection = selection;
    return s;
  };
  if (config.sample_size) {
    const auto splits = sample_learning_curve_splits(target_train, *config.sample_size, config.repeats, config.seed);
    for (std::size_t r = 0; r < splits.size(); ++r)
      shard_data.push_back(compose(splits[r].train, splits[r].selection, config.seed + r));
  } else {
    Corpus selection;
    switch (config.strategy) {
      case Strategy::zero_shot:
        selection = high_dev;
        break;
      case Strategy::translate_train:
        selection = target_dev.empty() ? translated_dev : target_dev;
        break;
      default:
        selection = target_dev;
    }
    for (std::size_t r = 0; r < config.repeats; ++r) shard_data.push_back(compose(target_train, selection, config.seed + r));
  }

  std::mutex say_mutex;
  auto run_shard = [&](std::size_t r) {
    const ShardData& d = shard_data[r];
    RunShard shard;
    shard.repeat = r;
    shard.seed = config.seed + r;
    shard.train_utterances = d.train.size();
    shard.selection_utterances = d.selection.size();
    {
      std::lock_guard lock(say_mutex);
      say("shard " + std::to_string(r + 1) + "/" + std::to_string(shard_data.size()) + ": training on " +
          std::to_string(d.train.size()) + " utterances");
    }
    TaggerConfig tc = config.tagger;
    tc.seed = shard.seed;
    auto result = train_tagger(d.train, d.selection, make_provider(config, d.train, vectors, encoder), tc);
    shard.metrics = evaluate(target_test, predict_corpus(result.model, target_test));
    shard.history = std::move(result.history);
    const std::string name = shard_data.size() == 1 ? "model.json" : "model-" + std::to_string(r) + ".json";
    result.model.save((fs::path(config.output_dir) / name).string());
    return shard;
  };

  // Results are collected by index, so the report does not depend on scheduling.
  std::vector<RunShard> shards(shard_data.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, shard_data.size()));
  if (workers == 1) {
    for (std::size_t r = 0; r < shard_data.size(); ++r) shards[r] = run_shard(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < shard_data.size(); r = next++) {
          try {
            shards[r] = run_shard(r);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<double> exact;
  std::vector<MetricReport> reports;
  for (RunShard& shard : shards) {
    exact.push_back(shard.metrics.exact_match);
    reports.push_back(shard.metrics);
    report.shards.push_back(std::move(shard));
  }

  const nlohmann::json resolved = config.to_json();
  nlohmann::json hashed = resolved;
  hashed.erase("output_dir");
  const std::string config_hash = git_blob_hash(hashed.dump());
  report.metrics = average_reports(reports);
  report.exact_match = summarize(exact);
  report.metadata["seed"] = config.seed;
  report.metadata["strategy"] = to_string(config.strategy);
  report.metadata["provider"] = to_string(config.provider.kind);
  report.metadata["sample_size"] = config.sample_size ? nlohmann::json(*config.sample_size) : nlohmann::json("all");
  report.metadata["repeats"] = report.shards.size();
  report.metadata["high_language"] = config.high_language;
  report.metadata["target_language"] = config.target_language;
  report.metadata["config_hash"] = config_hash;

  nlohmann::json manifest = {{"config", resolved}, {"seed", config.seed}, {"config_hash", config_hash}};
  write_json_file((fs::path(config.output_dir) / "manifest.json").string(), manifest);
  std::ofstream out(fs::path(config.output_dir) / "report.json", std::ios::binary);
  if (!out) throw DataError("cannot write report in '" + config.output_dir + "'");
  out << report.to_json().dump(2) << '\n';
  return report;
}

}  // namespace xnlu
