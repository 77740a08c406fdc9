#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "m2oie/tensor.hpp"

// Differentiable operations on rank-2 tensors. Every function records one
// node on the graph owning its inputs.
namespace m2oie::ops {

// a[m x k] * b[k x n]
template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// a[m x k] * b[n x k]^T
template <class T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

// Adds a 1 x n row to every row of a[m x n].
template <class T>
Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& row);

// x * w (+ bias when valid)
template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias);

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor);

template <class T>
Tensor<T> relu(const Tensor<T>& a);

// Row-wise softmax with max subtraction. -inf entries get weight zero (used
// for key masking); NaN input throws NumericError.
template <class T>
Tensor<T> softmax_rows(const Tensor<T>& a);

template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain,
                     const Tensor<T>& bias, T eps);

// Inverted dropout. Identity when the graph is in eval mode or rate == 0.
template <class T>
Tensor<T> dropout(const Tensor<T>& x, T rate);

// out[r] = a[indices[r]]; repeated indices accumulate gradient.
template <class T>
Tensor<T> gather_rows(const Tensor<T>& a, std::span<const std::size_t> indices);

// Column-wise mean over all rows -> 1 x n.
template <class T>
Tensor<T> mean_rows(const Tensor<T>& a);

// Repeats a 1 x n row m times.
template <class T>
Tensor<T> broadcast_rows(const Tensor<T>& row, std::size_t m);

template <class T>
Tensor<T> concat_cols(std::span<const Tensor<T>> parts);

template <class T>
Tensor<T> slice_cols(const Tensor<T>& a, std::size_t start, std::size_t width);

// Sum of all entries -> 1 x 1.
template <class T>
Tensor<T> sum(const Tensor<T>& a);

// sum_i weights[i] * scalars[i] -> 1 x 1.
template <class T>
Tensor<T> weighted_sum(std::span<const Tensor<T>> scalars,
                       std::span<const T> weights);

// Mean negative log-softmax probability of targets[i] over rows with
// keep[i] != 0. Throws ValidationError when no row is kept.
template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets,
                        std::span<const std::uint8_t> keep);

}  // namespace m2oie::ops
