#include "m2oie/argument_extractor.hpp"

#include "m2oie/encoder.hpp"
#include "softmax_decode.hpp"

namespace m2oie {

void ArgumentConfig::validate(std::size_t hidden) const {
  if (blocks == 0 || heads == 0 || pos_dim == 0 || ffn_dim == 0) {
    throw ConfigError("argument extractor: dimensions must be positive");
  }
  if (mh_dim(hidden) % heads != 0) {
    throw ConfigError("argument extractor: d_mh " + std::to_string(mh_dim(hidden)) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("argument extractor: dropout must be in [0, 1)");
}

template <class T>
AttentionBlockParams<T> AttentionBlockParams<T>::create(ParameterStore<T>& store,
                                                        const std::string& prefix,
                                                        std::size_t d, std::size_t ffn) {
  AttentionBlockParams p;
  p.wq = &store.add(prefix + ".wq", {d, d}, true);
  p.wk = &store.add(prefix + ".wk", {d, d}, true);
  p.wv = &store.add(prefix + ".wv", {d, d}, true);
  p.wo = &store.add(prefix + ".wo", {d, d}, true);
  p.bo = &store.add(prefix + ".bo", {d}, false);
  p.ln1_gain = &store.add(prefix + ".ln1.gain", {d}, false);
  p.ln1_bias = &store.add(prefix + ".ln1.bias", {d}, false);
  p.w1 = &store.add(prefix + ".ffn.w1", {d, ffn}, true);
  p.b1 = &store.add(prefix + ".ffn.b1", {ffn}, false);
  p.w2 = &store.add(prefix + ".ffn.w2", {ffn, d}, true);
  p.b2 = &store.add(prefix + ".ffn.b2", {d}, false);
  p.ln2_gain = &store.add(prefix + ".ln2.gain", {d}, false);
  p.ln2_bias = &store.add(prefix + ".ln2.bias", {d}, false);
  return p;
}

template <class T>
void AttentionBlockParams<T>::initialize(Rng& rng) {
  // Residual branch outputs start small so each block is near identity and the
  // predicate-row attention output (identical across query rows when the span
  // has one token) does not wash out per-token features.
  for (auto* w : {wq, wk, wv, w1}) init::xavier_uniform(*w, rng);
  for (auto* w : {wo, w2}) init::xavier_uniform(*w, rng, 0.1);
  for (auto* b : {bo, b1, b2, ln1_bias, ln2_bias}) init::fill(*b, T(0));
  init::fill(*ln1_gain, T(1));
  init::fill(*ln2_gain, T(1));
}

template <class T>
ArgumentParams<T> ArgumentParams<T>::create(ParameterStore<T>& store, const ArgumentConfig& cfg,
                                            std::size_t hidden) {
  cfg.validate(hidden);
  const std::size_t d = cfg.mh_dim(hidden);
  ArgumentParams p;
  p.position_table = &store.add("argument.position_table", {2, cfg.pos_dim}, false);
  for (std::size_t i = 0; i < cfg.blocks; ++i) {
    p.blocks.push_back(AttentionBlockParams<T>::create(store, "argument.block" + std::to_string(i),
                                                       d, cfg.ffn_dim));
  }
  p.head = ClassifierParams<T>::create(store, "argument.head", d, d, kNumArgTags);
  return p;
}

template <class T>
void ArgumentParams<T>::initialize(Rng& rng) {
  init::normal(*position_table, rng, 1.0);
  for (auto& b : blocks) b.initialize(rng);
  head.initialize(rng);
}

template <class T>
ArgInputs<T> build_inputs(const Tensor<T>& hidden, const PredicateSpan& span,
                          const Tensor<T>& position_table) {
  const std::size_t len = hidden.rows();
  if (span.empty()) throw ValidationError("build_inputs: empty predicate span");
  std::vector<std::size_t> membership(len, 0);
  for (auto i : span) {
    if (i >= len) {
      throw ValidationError("build_inputs: predicate index " + std::to_string(i) +
                            " outside sentence of length " + std::to_string(len));
    }
    membership[i] = 1;
  }
  if (position_table.rows() != 2) {
    throw DimensionError("build_inputs: position table must have 2 rows, got " +
                         shape_string(position_table.shape()));
  }
  auto pred_rows = ops::gather_rows(hidden, std::span<const std::size_t>(span));
  auto pred_mean = ops::broadcast_rows(ops::mean_rows(pred_rows), len);
  auto pos = ops::gather_rows(position_table, std::span<const std::size_t>(membership));
  const Tensor<T> parts[] = {hidden, pred_mean, pos};
  ArgInputs<T> in;
  in.x = ops::concat_cols<T>(parts);
  in.key_value = ops::gather_rows(in.x, std::span<const std::size_t>(span));
  return in;
}

template <class T>
Tensor<T> mh_block(const Tensor<T>& input, const PredicateSpan& span,
                   const AttentionBlockParams<T>& p, std::size_t heads, T dropout_rate,
                   AttentionTrace* trace) {
  auto& g = input.graph();
  const std::size_t d = input.cols();
  if (heads == 0 || d % heads != 0) {
    throw ConfigError("mh_block: d_mh " + std::to_string(d) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (p.wq->rows() != d) {
    throw DimensionError("mh_block: input width " + std::to_string(d) + " does not match weights " +
                         shape_string(p.wq->shape));
  }
  auto kv = ops::gather_rows(input, std::span<const std::size_t>(span));
  auto q = ops::matmul(input, g.parameter(*p.wq));
  auto k = ops::matmul(kv, g.parameter(*p.wk));
  auto v = ops::matmul(kv, g.parameter(*p.wv));
  auto z = multi_head_attention<T>(q, k, v, heads, nullptr, trace);
  auto a = ops::dropout(ops::linear(z, g.parameter(*p.wo), g.parameter(*p.bo)), dropout_rate);
  auto y = ops::layer_norm(ops::add(input, a), g.parameter(*p.ln1_gain), g.parameter(*p.ln1_bias),
                           T(kLayerNormEps));
  auto f = ops::relu(ops::linear(y, g.parameter(*p.w1), g.parameter(*p.b1)));
  f = ops::dropout(ops::linear(f, g.parameter(*p.w2), g.parameter(*p.b2)), dropout_rate);
  return ops::layer_norm(ops::add(y, f), g.parameter(*p.ln2_gain), g.parameter(*p.ln2_bias),
                         T(kLayerNormEps));
}

template <class T>
Tensor<T> argument_logits(Graph<T>& g, const ArgumentParams<T>& p, const ArgumentConfig& cfg,
                          const Tensor<T>& hidden, const PredicateSpan& span,
                          ArgumentProbe<T>* probe) {
  const T rate = static_cast<T>(cfg.dropout);
  auto in = build_inputs(hidden, span, g.parameter(*p.position_table));
  if (probe) {
    probe->inputs = in;
    probe->attention.assign(p.blocks.size(), {});
  }
  auto y = in.x;
  for (std::size_t b = 0; b < p.blocks.size(); ++b) {
    y = mh_block(y, span, p.blocks[b], cfg.heads, rate, probe ? &probe->attention[b] : nullptr);
  }
  return classifier_forward(g, p.head, y, rate);
}

template <class T>
ArgTagSequence decode_argument_logits(const Tensor<T>& logits) {
  ArgTagSequence seq;
  std::vector<int> best;
  detail::softmax_argmax<T, kNumArgTags>(logits, 0, seq.probs, best);
  for (int b : best) seq.tags.push_back(static_cast<ArgTag>(b));
  return seq;
}

template <class T>
ArgTagSequence extract_arguments(Graph<T>& g, const ArgumentParams<T>& params,
                                 const ArgumentConfig& cfg, const Tensor<T>& hidden,
                                 const PredicateSpan& span) {
  return decode_argument_logits(argument_logits(g, params, cfg, hidden, span));
}

template <class T>
Tensor<T> argument_loss(const Tensor<T>& logits, const std::vector<ArgTag>& gold,
                        std::span<const std::uint8_t> keep) {
  std::vector<int> targets(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) targets[i] = static_cast<int>(gold[i]);
  return ops::cross_entropy(logits, std::span<const int>(targets), keep);
}

#define M2OIE_INSTANTIATE(T)                                                                     \
  template struct AttentionBlockParams<T>;                                                       \
  template struct ArgumentParams<T>;                                                             \
  template ArgInputs<T> build_inputs(const Tensor<T>&, const PredicateSpan&, const Tensor<T>&);  \
  template Tensor<T> mh_block(const Tensor<T>&, const PredicateSpan&,                            \
                              const AttentionBlockParams<T>&, std::size_t, T, AttentionTrace*);  \
  template Tensor<T> argument_logits(Graph<T>&, const ArgumentParams<T>&, const ArgumentConfig&, \
                                     const Tensor<T>&, const PredicateSpan&, ArgumentProbe<T>*); \
  template ArgTagSequence decode_argument_logits(const Tensor<T>&);                              \
  template ArgTagSequence extract_arguments(Graph<T>&, const ArgumentParams<T>&,                 \
                                            const ArgumentConfig&, const Tensor<T>&,             \
                                            const PredicateSpan&);                               \
  template Tensor<T> argument_loss(const Tensor<T>&, const std::vector<ArgTag>&,                 \
                                   std::span<const std::uint8_t>);

M2OIE_INSTANTIATE(float)
M2OIE_INSTANTIATE(double)
#undef M2OIE_INSTANTIATE

}  // namespace m2oie
