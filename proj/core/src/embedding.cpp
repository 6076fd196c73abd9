#include "xnlu/embedding.hpp"

#include <algorithm>

#include "xnlu/checkpoint.hpp"
#include "xnlu/error.hpp"

namespace xnlu {

std::string to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::zero:
      return "zero";
    case ProviderKind::static_concat:
      return "static";
    case ProviderKind::encoder_concat:
      return "encoder";
  }
  return "zero";
}

ProviderKind parse_provider_kind(const std::string& text) {
  if (text == "zero") return ProviderKind::zero;
  if (text == "static" || text == "static_concat") return ProviderKind::static_concat;
  if (text == "encoder" || text == "encoder_concat") return ProviderKind::encoder_concat;
  throw PreconditionError("unknown embedding provider '" + text + "' (expected zero, static or encoder)");
}

std::size_t default_zero_dim(ProviderKind kind) { return kind == ProviderKind::zero ? 300 : 128; }

EmbeddingProvider::EmbeddingProvider(ProviderKind kind, Vocabulary vocab, std::size_t zero_dim)
    : kind_(kind), vocab_(std::move(vocab)), zero_dim_(zero_dim) {
  require(zero_dim_ > 0, "zero-embedding width must be positive");
}

EmbeddingProvider::EmbeddingProvider(const EmbeddingProvider& other)
    : kind_(other.kind_),
      vocab_(other.vocab_),
      zero_dim_(other.zero_dim_),
      static_(other.static_),
      encoder_(other.encoder_) {
  std::lock_guard lock(other.cache_mutex_);
  cache_ = other.cache_;
}

EmbeddingProvider EmbeddingProvider::zero(Vocabulary vocab, std::size_t zero_dim) {
  return {ProviderKind::zero, std::move(vocab), zero_dim};
}

EmbeddingProvider EmbeddingProvider::with_static(Vocabulary vocab, std::size_t zero_dim,
                                                 std::shared_ptr<const StaticVectors> vectors) {
  require(vectors != nullptr && vectors->dim() > 0, "static provider needs a non-empty vector table");
  EmbeddingProvider p(ProviderKind::static_concat, std::move(vocab), zero_dim);
  p.static_ = std::move(vectors);
  return p;
}

EmbeddingProvider EmbeddingProvider::with_encoder(Vocabulary vocab, std::size_t zero_dim,
                                                  std::shared_ptr<const Seq2SeqModel> encoder) {
  require(encoder != nullptr, "encoder provider needs a trained encoder");
  EmbeddingProvider p(ProviderKind::encoder_concat, std::move(vocab), zero_dim);
  p.encoder_ = std::move(encoder);
  return p;
}

std::size_t EmbeddingProvider::fixed_dim() const {
  switch (kind_) {
    case ProviderKind::zero:
      return 0;
    case ProviderKind::static_concat:
      return static_->dim();
    case ProviderKind::encoder_concat:
      return encoder_->encoder_output_dim();
  }
  return 0;
}

Parameter EmbeddingProvider::make_zero_table(const std::string& name) const {
  return zero_parameter(name, {vocab_.size(), zero_dim_});
}

Tensor EmbeddingProvider::fixed_features(std::span<const std::string> tokens) const {
  require(!tokens.empty(), "cannot embed an empty token sequence");
  if (kind_ == ProviderKind::static_concat) {
    Tensor out({tokens.size(), static_->dim()});
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      if (auto r = static_->find(tokens[t])) {
        auto src = static_->vector(*r);
        std::copy(src.begin(), src.end(), out.row(t).begin());
      }
    }
    return out;
  }
  if (kind_ == ProviderKind::encoder_concat) {
    std::vector<std::string> key(tokens.begin(), tokens.end());
    {
      std::lock_guard lock(cache_mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    Tensor out = encode_contextual(*encoder_, tokens);
    std::lock_guard lock(cache_mutex_);
    cache_.emplace(std::move(key), out);
    return out;
  }
  return {};
}

Var EmbeddingProvider::embed(Graph& g, std::span<const std::string> tokens, const Parameter& zero_table) const {
  require(!tokens.empty(), "cannot embed an empty token sequence");
  require(zero_table.value.rank() == 2 && zero_table.value.rows() == vocab_.size() &&
              zero_table.value.cols() == zero_dim_,
          "zero table '" + zero_table.name + "' does not match the provider vocabulary");
  const Tensor fixed = fixed_features(tokens);
  std::vector<Var> rows;
  rows.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    Var trainable = g.lookup(zero_table, vocab_.id(tokens[t]));
    if (fixed.empty()) {
      rows.push_back(trainable);
    } else {
      auto src = fixed.row(t);
      const Var parts[] = {g.constant(Tensor::vector({src.begin(), src.end()})), trainable};
      rows.push_back(concat(parts));
    }
  }
  return stack_rows(rows);
}

nlohmann::json EmbeddingProvider::to_json() const {
  nlohmann::json j = {{"kind", to_string(kind_)}, {"zero_dim", zero_dim_}, {"vocab", vocab_.to_json()}};
  if (static_) j["static"] = {{"tokens", static_->tokens()}, {"table", tensor_to_json(static_->table())}};
  if (encoder_) j["encoder"] = encoder_->to_json();
  return j;
}

EmbeddingProvider EmbeddingProvider::from_json(const nlohmann::json& j) {
  try {
    const ProviderKind kind = parse_provider_kind(j.at("kind").get<std::string>());
    Vocabulary vocab = Vocabulary::from_json(j.at("vocab"));
    const std::size_t zero_dim = j.at("zero_dim").get<std::size_t>();
    switch (kind) {
      case ProviderKind::zero:
        return zero(std::move(vocab), zero_dim);
      case ProviderKind::static_concat: {
        const auto& s = j.at("static");
        auto vectors = std::make_shared<StaticVectors>(s.at("tokens").get<std::vector<std::string>>(),
                                                       tensor_from_json(s.at("table")));
        return with_static(std::move(vocab), zero_dim, std::move(vectors));
      }
      case ProviderKind::encoder_concat:
        return with_encoder(std::move(vocab), zero_dim,
                            std::make_shared<Seq2SeqModel>(Seq2SeqModel::from_json(j.at("encoder"))));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed embedding provider: ") + e.what());
  } catch (const PreconditionError& e) {
    throw DataError(std::string("malformed embedding provider: ") + e.what());
  }
  throw DataError("malformed embedding provider");
}

Vocabulary tagger_vocabulary(const Corpus& corpus, std::size_t cap) {
  std::vector<Sentence> sentences;
  for (const AnnotatedUtterance& u : corpus) sentences.push_back(u.tokens);
  return build_vocab(sentences, cap);
}

}  // namespace xnlu
