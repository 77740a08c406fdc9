#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "m2oie/tensor.hpp"

namespace m2oie::detail {

// Shared by predicate and argument decoding: row softmax then argmax, in
// double precision regardless of T.
template <class T, std::size_t C>
inline void softmax_argmax(const Tensor<T>& logits, std::size_t length,
                    std::vector<std::array<double, C>>& probs, std::vector<int>& best) {
  if (logits.cols() != C) {
    throw DimensionError("expected " + std::to_string(C) + " logit columns, got " +
                         shape_string(logits.shape()));
  }
  const std::size_t rows = length == 0 ? logits.rows() : length;
  if (rows > logits.rows()) throw DimensionError("decode length exceeds logits rows");
  auto d = logits.data();
  probs.assign(rows, {});
  best.assign(rows, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    double mx = -HUGE_VAL;
    for (std::size_t j = 0; j < C; ++j) mx = std::max(mx, static_cast<double>(d[i * C + j]));
    double z = 0.0;
    for (std::size_t j = 0; j < C; ++j) {
      probs[i][j] = std::exp(static_cast<double>(d[i * C + j]) - mx);
      z += probs[i][j];
    }
    for (std::size_t j = 0; j < C; ++j) probs[i][j] /= z;
    best[i] = static_cast<int>(std::max_element(probs[i].begin(), probs[i].end()) - probs[i].begin());
  }
}

}  // namespace m2oie::detail
