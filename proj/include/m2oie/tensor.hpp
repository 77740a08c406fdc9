#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "m2oie/error.hpp"
#include "m2oie/rng.hpp"

namespace m2oie {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Rows/cols view of a rank-1 or rank-2 shape. Rank-1 shapes are treated as
// a single row.
std::size_t shape_rows(const Shape& shape);
std::size_t shape_cols(const Shape& shape);

// A trainable tensor that outlives individual forward passes.
template <class T>
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  // Decoupled weight decay applies only to matrices; biases, gains and
  // embedding tables opt out.
  bool decay = true;

  Parameter() = default;
  Parameter(std::string n, Shape s, bool d = true)
      : name(std::move(n)),
        shape(std::move(s)),
        value(shape_numel(shape), T(0)),
        grad(shape_numel(shape), T(0)),
        decay(d) {}

  std::size_t size() const { return value.size(); }
  std::size_t rows() const { return shape_rows(shape); }
  std::size_t cols() const { return shape_cols(shape); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

enum class Mode { kTrain, kEval };

template <class T>
class Graph;

// Lightweight handle to one recorded node of a Graph. Copies share the node.
template <class T>
class Tensor {
 public:
  Tensor() = default;

  bool valid() const { return graph_ != nullptr; }
  Graph<T>& graph() const { return *graph_; }
  std::uint32_t id() const { return id_; }

  const Shape& shape() const;
  std::size_t rows() const { return shape_rows(shape()); }
  std::size_t cols() const { return shape_cols(shape()); }
  std::size_t size() const { return data().size(); }
  bool requires_grad() const;

  std::span<const T> data() const;
  // Empty until backward() has reached this node.
  std::span<const T> grad() const;

  T at(std::size_t r, std::size_t c) const { return data()[r * cols() + c]; }
  T item() const;

 private:
  friend class Graph<T>;
  Tensor(Graph<T>* g, std::uint32_t id) : graph_(g), id_(id) {}

  Graph<T>* graph_ = nullptr;
  std::uint32_t id_ = 0;
};

// Tape of recorded operations. Nodes are appended in execution order, so
// every node's inputs precede it; backward() walks the tape in exact reverse.
template <class T>
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::uint32_t self)>;

  explicit Graph(Mode mode = Mode::kEval, std::uint64_t seed = 0)
      : mode_(mode), grad_enabled_(mode == Mode::kTrain), rng_(seed) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Mode mode() const { return mode_; }
  bool training() const { return mode_ == Mode::kTrain; }
  Rng& rng() { return rng_; }
  // Parameter leaves track gradients when enabled (default: train mode only).
  // Gradient checks enable it in eval mode so dropout stays off.
  bool grad_enabled() const { return grad_enabled_; }
  void set_grad_enabled(bool on) { grad_enabled_ = on; }
  // Fingerprint of which side of zero every ReLU input falls on. Finite
  // difference checks compare it to spot a step that crosses a kink.
  void set_track_kinks(bool on) { track_kinks_ = on; }
  bool track_kinks() const { return track_kinks_; }
  void note_kinks(std::span<const T> x) {
    for (T v : x) kink_signature_ = (kink_signature_ ^ (v > T(0) ? 1u : 2u)) * 0x100000001b3ULL;
  }
  std::uint64_t kink_signature() const { return kink_signature_; }
  std::size_t size() const { return nodes_.size(); }

  // Leaf bound to a persistent parameter; backward accumulates into p.grad.
  // Tracks gradients only while grad_enabled(). Repeated calls for the same
  // parameter return the same leaf.
  Tensor<T> parameter(Parameter<T>& p);
  Tensor<T> constant(Shape shape, std::vector<T> data);
  // Free leaf that tracks gradients (useful for tests and gradient checks).
  Tensor<T> variable(Shape shape, std::vector<T> data);

  // Seeds d(root)/d(root) = 1 and propagates to every reachable node.
  // The root must be a single-element tensor.
  void backward(const Tensor<T>& root);

  // --- used by operation implementations ---
  Tensor<T> record(Shape shape, std::vector<T> value,
                   std::initializer_list<Tensor<T>> inputs, BackwardFn fn);
  Tensor<T> record(Shape shape, std::vector<T> value,
                   std::span<const Tensor<T>> inputs, BackwardFn fn);

  const Shape& shape(std::uint32_t id) const { return nodes_[id].shape; }
  std::span<const T> value(std::uint32_t id) const { return nodes_[id].value; }
  std::span<const T> grad_view(std::uint32_t id) const { return nodes_[id].grad; }
  bool needs_grad(std::uint32_t id) const { return nodes_[id].requires_grad; }
  // Mutable gradient buffer, zero-allocated on first touch.
  std::span<T> grad(std::uint32_t id);

  void check_owner(const Tensor<T>& t) const;

 private:
  struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    BackwardFn backward;
  };

  Tensor<T> push(Node node);

  Mode mode_;
  bool grad_enabled_;
  Rng rng_;
  bool track_kinks_ = false;
  std::uint64_t kink_signature_ = 0xcbf29ce484222325ULL;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::uint32_t> param_leaves_;
};

template <class T>
const Shape& Tensor<T>::shape() const {
  return graph_->shape(id_);
}

template <class T>
bool Tensor<T>::requires_grad() const {
  return graph_->needs_grad(id_);
}

template <class T>
std::span<const T> Tensor<T>::data() const {
  return graph_->value(id_);
}

template <class T>
std::span<const T> Tensor<T>::grad() const {
  return graph_->grad_view(id_);
}

template <class T>
T Tensor<T>::item() const {
  auto d = data();
  if (d.size() != 1) {
    throw DimensionError("item() on non-scalar tensor of shape " +
                         shape_string(shape()));
  }
  return d[0];
}

}  // namespace m2oie
