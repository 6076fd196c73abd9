#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xnlu/corpus.hpp"
#include "xnlu/seq2seq.hpp"
#include "xnlu/vocab.hpp"

namespace xnlu {

enum class ProviderKind { zero, static_concat, encoder_concat };

std::string to_string(ProviderKind kind);
/// Accepts "zero", "static", "static_concat", "encoder", "encoder_concat".
ProviderKind parse_provider_kind(const std::string& text);

/// Width of the trainable table: 300 on its own, 128 next to pretrained features.
std::size_t default_zero_dim(ProviderKind kind);

/// Token features for the tagger. Every kind has a trainable,
/// zero-initialized table indexed by the vocabulary; the static and encoder
/// kinds prepend fixed features that never receive gradients. The trainable
/// table itself is owned by each model component (see make_zero_table).
class EmbeddingProvider {
 public:
  static EmbeddingProvider zero(Vocabulary vocab, std::size_t zero_dim);
  static EmbeddingProvider with_static(Vocabulary vocab, std::size_t zero_dim,
                                       std::shared_ptr<const StaticVectors> vectors);
  static EmbeddingProvider with_encoder(Vocabulary vocab, std::size_t zero_dim,
                                        std::shared_ptr<const Seq2SeqModel> encoder);

  EmbeddingProvider(const EmbeddingProvider& other);
  EmbeddingProvider& operator=(const EmbeddingProvider&) = delete;

  ProviderKind kind() const noexcept { return kind_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  std::size_t zero_dim() const noexcept { return zero_dim_; }
  std::size_t fixed_dim() const;
  std::size_t output_dim() const { return fixed_dim() + zero_dim_; }
  const StaticVectors* static_vectors() const { return static_.get(); }
  const Seq2SeqModel* encoder() const { return encoder_.get(); }

  /// Fresh all-zero [|V| x zero_dim] table.
  Parameter make_zero_table(const std::string& name) const;

  /// Fixed features [T x fixed_dim]; static rows are zero for tokens without
  /// a vector. Encoder outputs are memoized per token sequence.
  Tensor fixed_features(std::span<const std::string> tokens) const;

  /// [T x output_dim]: fixed features followed by the zero-table rows.
  Var embed(Graph& g, std::span<const std::string> tokens, const Parameter& zero_table) const;

  nlohmann::json to_json() const;
  static EmbeddingProvider from_json(const nlohmann::json& j);

 private:
  EmbeddingProvider(ProviderKind kind, Vocabulary vocab, std::size_t zero_dim);

  ProviderKind kind_;
  Vocabulary vocab_;
  std::size_t zero_dim_;
  std::shared_ptr<const StaticVectors> static_;
  std::shared_ptr<const Seq2SeqModel> encoder_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::vector<std::string>, Tensor> cache_;
};

/// Every token of the corpus, most frequent first, capped at `cap`.
Vocabulary tagger_vocabulary(const Corpus& corpus, std::size_t cap = 20000);

}  // namespace xnlu
