#include "m2oie/predicate_tagger.hpp"

#include "softmax_decode.hpp"

namespace m2oie {

template <class T>
Tensor<T> predicate_logits(Graph<T>& g, const ClassifierParams<T>& head, const Tensor<T>& hidden,
                           T dropout_rate) {
  return classifier_forward(g, head, hidden, dropout_rate);
}

template <class T>
PredTagSequence decode_predicate_logits(const Tensor<T>& logits, std::size_t length) {
  PredTagSequence seq;
  std::vector<int> best;
  detail::softmax_argmax<T, kNumPredTags>(logits, length, seq.probs, best);
  for (int b : best) seq.tags.push_back(static_cast<PredTag>(b));
  return seq;
}

template <class T>
PredTagSequence tag_predicates(Graph<T>& g, const ClassifierParams<T>& head, const Tensor<T>& hidden,
                               std::size_t length) {
  return decode_predicate_logits(predicate_logits(g, head, hidden, T(0)), length);
}

std::vector<PredicateSpan> group_predicates(const std::vector<PredTag>& tags) {
  std::vector<PredicateSpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    switch (tags[i]) {
      case PredTag::kB:
        spans.push_back({i});
        open = true;
        break;
      case PredTag::kI:
        if (open) {
          spans.back().push_back(i);
        } else {
          spans.push_back({i});
          open = true;
        }
        break;
      case PredTag::kO:
        open = false;
        break;
    }
  }
  return spans;
}

std::vector<PredTag> predicate_spans_to_tags(const std::vector<PredicateSpan>& spans,
                                             std::size_t length) {
  std::vector<PredTag> tags(length, PredTag::kO);
  for (const auto& span : spans) {
    for (std::size_t k = 0; k < span.size(); ++k) {
      if (span[k] >= length) throw ValidationError("predicate index outside sentence");
      if (tags[span[k]] != PredTag::kO) throw ValidationError("overlapping predicate spans");
      tags[span[k]] = k == 0 ? PredTag::kB : PredTag::kI;
    }
  }
  return tags;
}

template <class T>
Tensor<T> predicate_loss(const Tensor<T>& logits, const std::vector<PredTag>& gold,
                         std::span<const std::uint8_t> keep) {
  std::vector<int> targets(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) targets[i] = static_cast<int>(gold[i]);
  return ops::cross_entropy(logits, std::span<const int>(targets), keep);
}

#define M2OIE_INSTANTIATE(T)                                                                       \
  template Tensor<T> predicate_logits(Graph<T>&, const ClassifierParams<T>&, const Tensor<T>&, T); \
  template PredTagSequence decode_predicate_logits(const Tensor<T>&, std::size_t);                 \
  template PredTagSequence tag_predicates(Graph<T>&, const ClassifierParams<T>&, const Tensor<T>&, \
                                          std::size_t);                                            \
  template Tensor<T> predicate_loss(const Tensor<T>&, const std::vector<PredTag>&,                 \
                                    std::span<const std::uint8_t>);

M2OIE_INSTANTIATE(float)
M2OIE_INSTANTIATE(double)
#undef M2OIE_INSTANTIATE

}  // namespace m2oie
