#include "m2oie/layers.hpp"

#include <cmath>

namespace m2oie {

template <class T>
Parameter<T>& ParameterStore<T>::add(const std::string& name, Shape shape, bool decay) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter name '" + name + "'");
  params_.emplace_back(name, std::move(shape), decay);
  return params_.back();
}

template <class T>
Parameter<T>* ParameterStore<T>::find(const std::string& name) {
  for (auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
const Parameter<T>* ParameterStore<T>::find(const std::string& name) const {
  for (const auto& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

template <class T>
std::size_t ParameterStore<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template <class T>
std::vector<Parameter<T>*> ParameterStore<T>::pointers() {
  std::vector<Parameter<T>*> out;
  for (auto& p : params_) out.push_back(&p);
  return out;
}

template <class T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

namespace init {

template <class T>
void xavier_uniform(Parameter<T>& p, Rng& rng, double gain) {
  const double fan_in = static_cast<double>(p.rows());
  const double fan_out = static_cast<double>(p.cols());
  const double a = gain * std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : p.value) v = static_cast<T>(rng.uniform(-a, a));
}

template <class T>
void normal(Parameter<T>& p, Rng& rng, double stddev) {
  for (auto& v : p.value) v = static_cast<T>(rng.normal(0.0, stddev));
}

template <class T>
void fill(Parameter<T>& p, T value) {
  std::fill(p.value.begin(), p.value.end(), value);
}

}  // namespace init

template <class T>
ClassifierParams<T> ClassifierParams<T>::create(ParameterStore<T>& store, const std::string& prefix,
                                                std::size_t in_dim, std::size_t hidden,
                                                std::size_t classes) {
  ClassifierParams p;
  p.w1 = &store.add(prefix + ".w1", {in_dim, hidden}, true);
  p.b1 = &store.add(prefix + ".b1", {hidden}, false);
  p.w2 = &store.add(prefix + ".w2", {hidden, classes}, true);
  p.b2 = &store.add(prefix + ".b2", {classes}, false);
  return p;
}

template <class T>
void ClassifierParams<T>::initialize(Rng& rng) {
  init::xavier_uniform(*w1, rng);
  init::fill(*b1, T(0));
  // Small output weights start the head near the uniform distribution.
  init::xavier_uniform(*w2, rng, 0.1);
  init::fill(*b2, T(0));
}

template <class T>
Tensor<T> classifier_forward(Graph<T>& g, const ClassifierParams<T>& p, const Tensor<T>& x,
                             T dropout_rate) {
  auto h = ops::relu(ops::linear(x, g.parameter(*p.w1), g.parameter(*p.b1)));
  h = ops::dropout(h, dropout_rate);
  return ops::linear(h, g.parameter(*p.w2), g.parameter(*p.b2));
}

template <class T>
Tensor<T> multi_head_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                               std::size_t heads, const Tensor<T>* key_bias,
                               AttentionTrace* trace) {
  const std::size_t dim = q.cols();
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("attention width " + std::to_string(dim) + " not divisible by " +
                      std::to_string(heads) + " heads");
  }
  if (k.cols() != dim || v.cols() != dim || k.rows() != v.rows()) {
    throw DimensionError("attention: incompatible Q/K/V shapes " + shape_string(q.shape()) + ", " +
                         shape_string(k.shape()) + ", " + shape_string(v.shape()));
  }
  const std::size_t dh = dim / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  if (trace) *trace = AttentionTrace{heads, {}, {}, {}};
  std::vector<Tensor<T>> outs;
  outs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    auto qh = ops::slice_cols(q, h * dh, dh);
    auto kh = ops::slice_cols(k, h * dh, dh);
    auto vh = ops::slice_cols(v, h * dh, dh);
    auto scores = ops::scale(ops::matmul_nt(qh, kh), inv_sqrt);
    if (key_bias) scores = ops::add_row(scores, *key_bias);
    auto weights = ops::softmax_rows(scores);
    if (trace) {
      trace->rows.push_back(weights.rows());
      trace->cols.push_back(weights.cols());
      trace->weights.emplace_back(weights.data().begin(), weights.data().end());
    }
    outs.push_back(ops::matmul(weights, vh));
  }
  if (heads == 1) return outs.front();
  return ops::concat_cols<T>(outs);
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template struct ClassifierParams<float>;
template struct ClassifierParams<double>;

#define M2OIE_INSTANTIATE(T)                                                                   \
  template void init::xavier_uniform(Parameter<T>&, Rng&, double);                             \
  template void init::normal(Parameter<T>&, Rng&, double);                                     \
  template void init::fill(Parameter<T>&, T);                                                  \
  template Tensor<T> classifier_forward(Graph<T>&, const ClassifierParams<T>&, const Tensor<T>&, T); \
  template Tensor<T> multi_head_attention(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                          std::size_t, const Tensor<T>*, AttentionTrace*);

M2OIE_INSTANTIATE(float)
M2OIE_INSTANTIATE(double)
#undef M2OIE_INSTANTIATE

}  // namespace m2oie
