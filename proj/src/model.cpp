#include "m2oie/model.hpp"

namespace m2oie {

template <class T>
Model<T>::Model(ModelConfig config, Vocabulary vocab)
    : config_(std::move(config)), vocab_(std::move(vocab)), store_(std::make_unique<ParameterStore<T>>()) {
  if (config_.encoder.vocab_size == 0) config_.encoder.vocab_size = vocab_.size();
  if (config_.encoder.vocab_size != vocab_.size()) {
    throw ConfigError("model: config vocab_size " + std::to_string(config_.encoder.vocab_size) +
                      " differs from vocabulary size " + std::to_string(vocab_.size()));
  }
  config_.validate();
  encoder_ = EncoderParams<T>::create(*store_, config_.encoder);
  predicate_head_ = ClassifierParams<T>::create(*store_, "predicate.head", config_.encoder.hidden,
                                                config_.encoder.hidden, kNumPredTags);
  argument_ = ArgumentParams<T>::create(*store_, config_.argument, config_.encoder.hidden);
}

template <class T>
void Model<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  encoder_.initialize(rng);
  predicate_head_.initialize(rng);
  argument_.initialize(rng);
}

template <class T>
void Model<T>::set_dropout(double encoder_rate, double argument_rate) {
  config_.encoder.dropout = encoder_rate;
  config_.argument.dropout = argument_rate;
  config_.validate();
}

template <class T>
SentenceForward<T> forward_sentence(Graph<T>& g, const Model<T>& model, const Sentence& sentence) {
  SentenceForward<T> out;
  out.hidden = encode(g, model.encoder(), model.config().encoder, sentence);
  out.predicate_logits = predicate_logits(g, model.predicate_head(), out.hidden,
                                          static_cast<T>(model.config().encoder.dropout));
  return out;
}

template class Model<float>;
template class Model<double>;
template SentenceForward<float> forward_sentence(Graph<float>&, const Model<float>&, const Sentence&);
template SentenceForward<double> forward_sentence(Graph<double>&, const Model<double>&, const Sentence&);

}  // namespace m2oie
