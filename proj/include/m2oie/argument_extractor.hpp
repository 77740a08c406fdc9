#pragma once

#include <vector>

#include "m2oie/layers.hpp"
#include "m2oie/predicate_tagger.hpp"
#include "m2oie/tags.hpp"

namespace m2oie {

struct ArgumentConfig {
  std::size_t blocks = 4;
  std::size_t heads = 8;
  std::size_t pos_dim = 16;
  std::size_t ffn_dim = 288;
  double dropout = 0.2;

  // Width of the fused representation: 2 * hidden + pos_dim.
  std::size_t mh_dim(std::size_t hidden) const { return 2 * hidden + pos_dim; }
  void validate(std::size_t hidden) const;
};

// Fused argument-extraction input for one predicate.
//   x         [l x d_mh]: concat(H, mean of H over the predicate, E_pos)
//   key_value [p x d_mh]: rows of x at the predicate positions, in order
// The query side is x itself.
template <class T>
struct ArgInputs {
  Tensor<T> x;
  Tensor<T> key_value;
};

// One attention block: predicate-row cross attention, projection, residual +
// layer norm, then a ReLU feed-forward layer with residual + layer norm.
template <class T>
struct AttentionBlockParams {
  Parameter<T>* wq = nullptr;
  Parameter<T>* wk = nullptr;
  Parameter<T>* wv = nullptr;
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

  static AttentionBlockParams create(ParameterStore<T>& store, const std::string& prefix,
                                     std::size_t mh_dim, std::size_t ffn_dim);
  void initialize(Rng& rng);
};

template <class T>
struct ArgumentParams {
  Parameter<T>* position_table = nullptr;  // 2 x pos_dim; row 1 marks predicate tokens
  std::vector<AttentionBlockParams<T>> blocks;
  ClassifierParams<T> head;

  static ArgumentParams create(ParameterStore<T>& store, const ArgumentConfig& cfg,
                               std::size_t hidden);
  void initialize(Rng& rng);
};

// X[i] = concat(H[i], mean(H[span]), pos_table[i in span ? 1 : 0]).
// Throws ValidationError for an empty or out-of-range span.
template <class T>
ArgInputs<T> build_inputs(const Tensor<T>& hidden, const PredicateSpan& span,
                          const Tensor<T>& position_table);

// Applies one block. Keys/values are the predicate rows of the block's own
// input, so stacked blocks re-slice them from the current representation.
template <class T>
Tensor<T> mh_block(const Tensor<T>& input, const PredicateSpan& span,
                   const AttentionBlockParams<T>& params, std::size_t heads, T dropout_rate,
                   AttentionTrace* trace = nullptr);

// Optional per-block observation of the forward pass.
template <class T>
struct ArgumentProbe {
  ArgInputs<T> inputs;
  std::vector<AttentionTrace> attention;  // one per block
};

// Runs build_inputs, every block and the 9-way classifier; returns logits.
template <class T>
Tensor<T> argument_logits(Graph<T>& g, const ArgumentParams<T>& params, const ArgumentConfig& cfg,
                          const Tensor<T>& hidden, const PredicateSpan& span,
                          ArgumentProbe<T>* probe = nullptr);

template <class T>
ArgTagSequence decode_argument_logits(const Tensor<T>& logits);

template <class T>
ArgTagSequence extract_arguments(Graph<T>& g, const ArgumentParams<T>& params,
                                 const ArgumentConfig& cfg, const Tensor<T>& hidden,
                                 const PredicateSpan& span);

template <class T>
Tensor<T> argument_loss(const Tensor<T>& logits, const std::vector<ArgTag>& gold,
                        std::span<const std::uint8_t> keep);

}  // namespace m2oie
