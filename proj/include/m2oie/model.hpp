#pragma once

#include <memory>

#include "m2oie/argument_extractor.hpp"
#include "m2oie/encoder.hpp"
#include "m2oie/predicate_tagger.hpp"
#include "m2oie/text.hpp"

namespace m2oie {

struct ModelConfig {
  EncoderConfig encoder;
  ArgumentConfig argument;

  std::size_t mh_dim() const { return argument.mh_dim(encoder.hidden); }
  void validate() const {
    encoder.validate();
    argument.validate(encoder.hidden);
  }
};

// Encoder + predicate head + argument extractor over one parameter store.
// T is float for training/inference and double for gradient checking.
template <class T>
class Model {
 public:
  Model(ModelConfig config, Vocabulary vocab);

  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // Fresh random weights, fully determined by the seed.
  void initialize(std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  ParameterStore<T>& params() { return *store_; }
  const ParameterStore<T>& params() const { return *store_; }

  const EncoderParams<T>& encoder() const { return encoder_; }
  const ClassifierParams<T>& predicate_head() const { return predicate_head_; }
  const ArgumentParams<T>& argument() const { return argument_; }

  // Copy with every weight converted to U.
  template <class U>
  Model<U> cast() const {
    Model<U> out(config_, vocab_);
    for (std::size_t i = 0; i < store_->size(); ++i) {
      const auto& src = (*store_)[i];
      auto& dst = out.params()[i];
      for (std::size_t k = 0; k < src.size(); ++k) dst.value[k] = static_cast<U>(src.value[k]);
    }
    return out;
  }

  // Rewrites the dropout rates of both stages (config only; weights untouched).
  void set_dropout(double encoder_rate, double argument_rate);

 private:
  ModelConfig config_;
  Vocabulary vocab_;
  std::unique_ptr<ParameterStore<T>> store_;
  EncoderParams<T> encoder_;
  ClassifierParams<T> predicate_head_;
  ArgumentParams<T> argument_;
};

// Hidden states followed by the predicate logits for one sentence.
template <class T>
struct SentenceForward {
  Tensor<T> hidden;
  Tensor<T> predicate_logits;
};

template <class T>
SentenceForward<T> forward_sentence(Graph<T>& g, const Model<T>& model, const Sentence& sentence);

}  // namespace m2oie
