#include "m2oie/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace m2oie {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return shape.empty() ? 0 : n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_rows(const Shape& shape) {
  if (shape.size() == 1) return 1;
  if (shape.size() == 2) return shape[0];
  throw DimensionError("expected rank 1 or 2, got " + shape_string(shape));
}

std::size_t shape_cols(const Shape& shape) {
  if (shape.size() == 1) return shape[0];
  if (shape.size() == 2) return shape[1];
  throw DimensionError("expected rank 1 or 2, got " + shape_string(shape));
}

template <class T>
Tensor<T> Graph<T>::push(Node node) {
  if (shape_numel(node.shape) != node.value.size()) {
    throw DimensionError("data length " + std::to_string(node.value.size()) +
                         " does not match shape " + shape_string(node.shape));
  }
  for (auto e : node.shape) {
    if (e == 0) throw DimensionError("zero extent in shape " + shape_string(node.shape));
  }
  nodes_.push_back(std::move(node));
  return Tensor<T>(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

template <class T>
Tensor<T> Graph<T>::parameter(Parameter<T>& p) {
  auto it = param_leaves_.find(&p);
  if (it != param_leaves_.end() && nodes_[it->second].requires_grad == grad_enabled_) {
    return Tensor<T>(this, it->second);
  }
  Node n;
  n.shape = p.shape;
  n.value = p.value;
  n.requires_grad = grad_enabled_;
  n.param = grad_enabled_ ? &p : nullptr;
  auto t = push(std::move(n));
  param_leaves_[&p] = t.id();
  return t;
}

template <class T>
Tensor<T> Graph<T>::constant(Shape shape, std::vector<T> data) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(data);
  return push(std::move(n));
}

template <class T>
Tensor<T> Graph<T>::variable(Shape shape, std::vector<T> data) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(data);
  n.requires_grad = true;
  return push(std::move(n));
}

template <class T>
void Graph<T>::check_owner(const Tensor<T>& t) const {
  if (!t.valid() || &t.graph() != this) {
    throw Error("tensor does not belong to this graph");
  }
}

template <class T>
Tensor<T> Graph<T>::record(Shape shape, std::vector<T> value,
                           std::initializer_list<Tensor<T>> inputs, BackwardFn fn) {
  return record(std::move(shape), std::move(value),
                std::span<const Tensor<T>>(inputs.begin(), inputs.size()), std::move(fn));
}

template <class T>
Tensor<T> Graph<T>::record(Shape shape, std::vector<T> value,
                           std::span<const Tensor<T>> inputs, BackwardFn fn) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  for (const auto& in : inputs) {
    if (!in.valid()) continue;
    check_owner(in);
    n.requires_grad = n.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (n.requires_grad) n.backward = std::move(fn);
  return push(std::move(n));
}

template <class T>
std::span<T> Graph<T>::grad(std::uint32_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.value.size(), T(0));
  return n.grad;
}

template <class T>
void Graph<T>::backward(const Tensor<T>& root) {
  check_owner(root);
  auto& r = nodes_[root.id()];
  if (r.value.size() != 1) {
    throw DimensionError("backward() needs a scalar root, got shape " +
                         shape_string(r.shape));
  }
  if (!r.requires_grad) return;
  grad(root.id())[0] = T(1);
  for (std::int64_t id = root.id(); id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, static_cast<std::uint32_t>(id));
    if (n.param != nullptr) {
      auto& pg = n.param->grad;
      for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad[i];
    }
  }
}

template class Graph<float>;
template class Graph<double>;
template class Tensor<float>;
template class Tensor<double>;

}  // namespace m2oie
