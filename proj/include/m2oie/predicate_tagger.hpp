#pragma once

#include <vector>

#include "m2oie/layers.hpp"
#include "m2oie/tags.hpp"

namespace m2oie {

// Token indices of one predicate; front() is the P-B position.
using PredicateSpan = Span;

// Per-token P-B / P-I / O logits (rows x 3) from hidden states.
template <class T>
Tensor<T> predicate_logits(Graph<T>& g, const ClassifierParams<T>& head, const Tensor<T>& hidden,
                           T dropout_rate);

// Softmax probabilities and argmax tags for the first `length` rows of a
// logits matrix (length 0 means all rows).
template <class T>
PredTagSequence decode_predicate_logits(const Tensor<T>& logits, std::size_t length = 0);

template <class T>
PredTagSequence tag_predicates(Graph<T>& g, const ClassifierParams<T>& head, const Tensor<T>& hidden,
                               std::size_t length = 0);

// Maximal runs of P-B followed by P-I. An orphan P-I (no preceding P-B/P-I)
// opens a new span instead of being dropped.
std::vector<PredicateSpan> group_predicates(const std::vector<PredTag>& tags);
inline std::vector<PredicateSpan> group_predicates(const PredTagSequence& seq) {
  return group_predicates(seq.tags);
}

// Gold tags for a set of disjoint predicate spans over `length` tokens.
std::vector<PredTag> predicate_spans_to_tags(const std::vector<PredicateSpan>& spans,
                                             std::size_t length);

// Masked mean cross-entropy over the 3 predicate classes.
template <class T>
Tensor<T> predicate_loss(const Tensor<T>& logits, const std::vector<PredTag>& gold,
                         std::span<const std::uint8_t> keep);

}  // namespace m2oie
