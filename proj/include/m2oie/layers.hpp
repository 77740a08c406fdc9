#pragma once

#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "m2oie/ops.hpp"
#include "m2oie/rng.hpp"
#include "m2oie/tensor.hpp"

namespace m2oie {

// Owns every parameter of a model in creation order. Addresses stay stable
// for the store's lifetime, so modules keep raw pointers into it.
template <class T>
class ParameterStore {
 public:
  Parameter<T>& add(const std::string& name, Shape shape, bool decay);
  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  Parameter<T>& operator[](std::size_t i) { return params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::vector<Parameter<T>*> pointers();
  void zero_grad();

 private:
  std::deque<Parameter<T>> params_;
};

namespace init {
template <class T>
void xavier_uniform(Parameter<T>& p, Rng& rng, double gain = 1.0);
template <class T>
void normal(Parameter<T>& p, Rng& rng, double stddev);
template <class T>
void fill(Parameter<T>& p, T value);
}  // namespace init

// Two-layer position-wise classifier: relu(x W1 + b1) -> dropout -> W2 + b2.
template <class T>
struct ClassifierParams {
  Parameter<T>* w1 = nullptr;
  Parameter<T>* b1 = nullptr;
  Parameter<T>* w2 = nullptr;
  Parameter<T>* b2 = nullptr;

  static ClassifierParams create(ParameterStore<T>& store, const std::string& prefix,
                                 std::size_t in_dim, std::size_t hidden, std::size_t classes);
  void initialize(Rng& rng);
};

template <class T>
Tensor<T> classifier_forward(Graph<T>& g, const ClassifierParams<T>& p, const Tensor<T>& x,
                             T dropout_rate);

// Attention weights captured per head (rows = queries, cols = keys).
struct AttentionTrace {
  std::size_t heads = 0;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  std::vector<std::vector<double>> weights;  // one row-major matrix per head
};

// Scaled dot-product attention split over `heads` column groups of Q/K/V,
// heads concatenated back. `key_bias` (1 x keys, optional) is added to every
// score row before the softmax; -inf entries mask keys out.
template <class T>
Tensor<T> multi_head_attention(const Tensor<T>& q, const Tensor<T>& k, const Tensor<T>& v,
                               std::size_t heads, const Tensor<T>* key_bias,
                               AttentionTrace* trace);

}  // namespace m2oie
