#pragma once

#include <vector>

#include "m2oie/evaluator.hpp"

namespace m2oie::testing {

inline Extraction make_extraction(const std::string& id, Span pred, ArgSpans args, double conf) {
  Extraction e;
  e.sentence_id = id;
  e.predicate = std::move(pred);
  e.args = std::move(args);
  e.confidence = conf;
  return e;
}

// Ten-token sentence "s" with two gold tuples:
//   G1 = (1; 0; 2 3)      G2 = (5; 4; 6 7)
// and three extractions by descending confidence:
//   E1 (3.0) = G1 exactly
//   E2 (2.0) = (1; 0; 2), a weaker duplicate of G1
//   E3 (1.0) = (5; 4; 6 7 8 9), G2 with a doubled ARG1
//
// Tuple matcher by threshold:
//   3.0: E1-G1 credit (1, 1)          -> P = 1/1,            R = 1/2
//   2.0: E2 finds no free gold        -> P = 1/2,            R = 1/2
//   1.0: E3-G2 credit (4/6, 4/4)      -> P = (1 + 2/3) / 3,  R = 2/2
// AUC (start at recall 0 with precision 1, trapezoids over recall)
//   = 0.5 * 1 + 0.5 * (1/2 + 5/9) / 2 = 55/72; max F1 = 2 (5/9) / (14/9) = 5/7.
// Lexical matcher: every match counts 1, so the last point is P = 2/3, R = 1;
//   AUC = 0.5 + 0.5 * (1/2 + 2/3) / 2 = 19/24; max F1 = 4/5.
struct ScorerFixture {
  std::vector<Extraction> predictions;
  std::vector<GoldTuple> golds;

  ScorerFixture() {
    golds.push_back({"s", {1}, {Span{0}, Span{2, 3}, std::nullopt, std::nullopt}});
    golds.push_back({"s", {5}, {Span{4}, Span{6, 7}, std::nullopt, std::nullopt}});
    predictions.push_back(make_extraction("s", {1}, {Span{0}, Span{2, 3}, std::nullopt, std::nullopt}, 3.0));
    predictions.push_back(make_extraction("s", {1}, {Span{0}, Span{2}, std::nullopt, std::nullopt}, 2.0));
    predictions.push_back(make_extraction("s", {5}, {Span{4}, Span{6, 7, 8, 9}, std::nullopt, std::nullopt}, 1.0));
  }

  static constexpr double kTuplePoints[3][3] = {{3.0, 1.0, 0.5}, {2.0, 0.5, 0.5}, {1.0, 5.0 / 9.0, 1.0}};
  static constexpr double kTupleAuc = 55.0 / 72.0;
  static constexpr double kTupleF1 = 5.0 / 7.0;
  static constexpr double kLexicalPoints[3][3] = {{3.0, 1.0, 0.5}, {2.0, 0.5, 0.5}, {1.0, 2.0 / 3.0, 1.0}};
  static constexpr double kLexicalAuc = 19.0 / 24.0;
  static constexpr double kLexicalF1 = 4.0 / 5.0;
};

}  // namespace m2oie::testing
