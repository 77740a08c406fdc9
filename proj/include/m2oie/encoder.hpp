#pragma once

#include <string>
#include <vector>

#include "m2oie/layers.hpp"
#include "m2oie/text.hpp"

namespace m2oie {

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t hidden = 64;
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t max_length = 64;
  std::size_t ffn_dim = 256;
  double dropout = 0.1;

  void validate() const;
};

// Post-LN transformer encoder with learned absolute positions.
template <class T>
struct EncoderParams {
  struct Layer {
    Parameter<T>* wq = nullptr;
    Parameter<T>* bq = nullptr;
    Parameter<T>* wk = nullptr;
    Parameter<T>* bk = nullptr;
    Parameter<T>* wv = nullptr;
    Parameter<T>* bv = nullptr;
    Parameter<T>* wo = nullptr;
    Parameter<T>* bo = nullptr;
    Parameter<T>* ln1_gain = nullptr;
    Parameter<T>* ln1_bias = nullptr;
    Parameter<T>* w1 = nullptr;
    Parameter<T>* b1 = nullptr;
    Parameter<T>* w2 = nullptr;
    Parameter<T>* b2 = nullptr;
    Parameter<T>* ln2_gain = nullptr;
    Parameter<T>* ln2_bias = nullptr;
  };

  Parameter<T>* token_embedding = nullptr;
  Parameter<T>* position_embedding = nullptr;
  Parameter<T>* emb_ln_gain = nullptr;
  Parameter<T>* emb_ln_bias = nullptr;
  std::vector<Layer> layers;

  static EncoderParams create(ParameterStore<T>& store, const EncoderConfig& cfg);
  void initialize(Rng& rng);
};

inline constexpr double kLayerNormEps = 1e-5;

// Hidden states H (padded_length x hidden). Pad positions are masked out as
// attention keys, so they never influence rows of real tokens.
template <class T>
Tensor<T> encode(Graph<T>& g, const EncoderParams<T>& params, const EncoderConfig& cfg,
                 const Sentence& sentence);

}  // namespace m2oie
