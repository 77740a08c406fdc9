#include "m2oie/encoder.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace m2oie {

void EncoderConfig::validate() const {
  if (vocab_size == 0) throw ConfigError("encoder: vocab_size must be positive");
  if (hidden == 0 || layers == 0 || heads == 0 || max_length == 0 || ffn_dim == 0) {
    throw ConfigError("encoder: dimensions must be positive");
  }
  if (hidden % heads != 0) {
    throw ConfigError("encoder: hidden " + std::to_string(hidden) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must be in [0, 1)");
}

template <class T>
EncoderParams<T> EncoderParams<T>::create(ParameterStore<T>& store, const EncoderConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.hidden;
  EncoderParams p;
  p.token_embedding = &store.add("encoder.token_embedding", {cfg.vocab_size, d}, false);
  p.position_embedding = &store.add("encoder.position_embedding", {cfg.max_length, d}, false);
  p.emb_ln_gain = &store.add("encoder.emb_ln.gain", {d}, false);
  p.emb_ln_bias = &store.add("encoder.emb_ln.bias", {d}, false);
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    const std::string pre = "encoder.layer" + std::to_string(i) + ".";
    Layer l;
    l.wq = &store.add(pre + "attn.wq", {d, d}, true);
    l.bq = &store.add(pre + "attn.bq", {d}, false);
    l.wk = &store.add(pre + "attn.wk", {d, d}, true);
    l.bk = &store.add(pre + "attn.bk", {d}, false);
    l.wv = &store.add(pre + "attn.wv", {d, d}, true);
    l.bv = &store.add(pre + "attn.bv", {d}, false);
    l.wo = &store.add(pre + "attn.wo", {d, d}, true);
    l.bo = &store.add(pre + "attn.bo", {d}, false);
    l.ln1_gain = &store.add(pre + "ln1.gain", {d}, false);
    l.ln1_bias = &store.add(pre + "ln1.bias", {d}, false);
    l.w1 = &store.add(pre + "ffn.w1", {d, cfg.ffn_dim}, true);
    l.b1 = &store.add(pre + "ffn.b1", {cfg.ffn_dim}, false);
    l.w2 = &store.add(pre + "ffn.w2", {cfg.ffn_dim, d}, true);
    l.b2 = &store.add(pre + "ffn.b2", {d}, false);
    l.ln2_gain = &store.add(pre + "ln2.gain", {d}, false);
    l.ln2_bias = &store.add(pre + "ln2.bias", {d}, false);
    p.layers.push_back(l);
  }
  return p;
}

template <class T>
void EncoderParams<T>::initialize(Rng& rng) {
  init::normal(*token_embedding, rng, 1.0);
  init::normal(*position_embedding, rng, 1.0);
  init::fill(*emb_ln_gain, T(1));
  init::fill(*emb_ln_bias, T(0));
  for (auto& l : layers) {
    for (auto* w : {l.wq, l.wk, l.wv, l.wo, l.w1, l.w2}) init::xavier_uniform(*w, rng);
    for (auto* b : {l.bq, l.bk, l.bv, l.bo, l.b1, l.b2, l.ln1_bias, l.ln2_bias}) init::fill(*b, T(0));
    init::fill(*l.ln1_gain, T(1));
    init::fill(*l.ln2_gain, T(1));
  }
}

template <class T>
Tensor<T> encode(Graph<T>& g, const EncoderParams<T>& p, const EncoderConfig& cfg,
                 const Sentence& s) {
  const std::size_t len = s.padded_length();
  if (len == 0) throw ValidationError("encode: empty sentence");
  if (len > cfg.max_length) {
    throw ValidationError("encode: sentence length " + std::to_string(len) +
                          " exceeds max_length " + std::to_string(cfg.max_length));
  }
  if (s.pad_mask.size() != len) throw ValidationError("encode: pad_mask length differs from token_ids");
  std::vector<std::size_t> ids(len);
  bool any_real = false;
  for (std::size_t i = 0; i < len; ++i) {
    const auto id = s.token_ids[i];
    if (id < 0 || static_cast<std::size_t>(id) >= cfg.vocab_size) {
      throw ValidationError("encode: token id " + std::to_string(id) + " outside vocabulary of " +
                            std::to_string(cfg.vocab_size));
    }
    ids[i] = static_cast<std::size_t>(id);
    any_real = any_real || !s.pad_mask[i];
  }
  if (!any_real) throw ValidationError("encode: sentence has no unpadded position");
  std::vector<std::size_t> positions(len);
  std::iota(positions.begin(), positions.end(), std::size_t{0});

  const T rate = static_cast<T>(cfg.dropout);
  auto x = ops::add(ops::gather_rows(g.parameter(*p.token_embedding), std::span<const std::size_t>(ids)),
                    ops::gather_rows(g.parameter(*p.position_embedding),
                                     std::span<const std::size_t>(positions)));
  x = ops::layer_norm(x, g.parameter(*p.emb_ln_gain), g.parameter(*p.emb_ln_bias), T(kLayerNormEps));
  x = ops::dropout(x, rate);

  std::vector<T> bias(len, T(0));
  bool padded = false;
  for (std::size_t i = 0; i < len; ++i) {
    if (s.pad_mask[i]) {
      bias[i] = -std::numeric_limits<T>::infinity();
      padded = true;
    }
  }
  Tensor<T> key_bias;
  if (padded) key_bias = g.constant({1, len}, std::move(bias));

  for (const auto& l : p.layers) {
    auto q = ops::linear(x, g.parameter(*l.wq), g.parameter(*l.bq));
    auto k = ops::linear(x, g.parameter(*l.wk), g.parameter(*l.bk));
    auto v = ops::linear(x, g.parameter(*l.wv), g.parameter(*l.bv));
    auto z = multi_head_attention(q, k, v, cfg.heads, padded ? &key_bias : nullptr, nullptr);
    auto a = ops::dropout(ops::linear(z, g.parameter(*l.wo), g.parameter(*l.bo)), rate);
    x = ops::layer_norm(ops::add(x, a), g.parameter(*l.ln1_gain), g.parameter(*l.ln1_bias),
                        T(kLayerNormEps));
    auto f = ops::relu(ops::linear(x, g.parameter(*l.w1), g.parameter(*l.b1)));
    f = ops::dropout(ops::linear(f, g.parameter(*l.w2), g.parameter(*l.b2)), rate);
    x = ops::layer_norm(ops::add(x, f), g.parameter(*l.ln2_gain), g.parameter(*l.ln2_bias),
                        T(kLayerNormEps));
  }
  return x;
}

template struct EncoderParams<float>;
template struct EncoderParams<double>;
template Tensor<float> encode(Graph<float>&, const EncoderParams<float>&, const EncoderConfig&,
                              const Sentence&);
template Tensor<double> encode(Graph<double>&, const EncoderParams<double>&, const EncoderConfig&,
                               const Sentence&);

}  // namespace m2oie
