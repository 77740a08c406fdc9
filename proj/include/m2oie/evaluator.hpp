#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "m2oie/corpus.hpp"
#include "m2oie/tuple_assembly.hpp"

namespace m2oie {

struct GoldTuple {
  std::string sentence_id;
  Span predicate;
  ArgSpans args;
};

std::vector<GoldTuple> gold_tuples(const std::vector<AnnotatedSentence>& corpus);

// True iff at least half of the gold tokens of the predicate and of every
// gold-present slot appear in the corresponding predicted slot (as sets).
bool lexical_match(const Extraction& pred, const GoldTuple& gold);

struct MatchCredit {
  double precision = 0.0;
  double recall = 0.0;
};

// Token overlap summed over predicate + four slots: precision = overlap /
// predicted tokens, recall = overlap / gold tokens. Zero unless the
// predicates share at least one token.
MatchCredit tuple_match_score(const Extraction& pred, const GoldTuple& gold);

enum class Matcher { kLexical, kTuple };

Matcher parse_matcher(std::string_view name);  // "lexical" | "tuple"; ConfigError otherwise
std::string matcher_name(Matcher m);

struct PRPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// One point per distinct confidence, from the highest threshold down.
// Predictions are visited by descending confidence (stable); each takes the
// unconsumed gold of its sentence with the highest credit (first on ties),
// so the matching at a lower threshold extends the one above it.
// No predictions gives the single point (0, 0, 0). Throws ValidationError when
// there are no gold tuples.
std::vector<PRPoint> pr_curve(const std::vector<Extraction>& predictions, const std::vector<GoldTuple>& golds,
                              Matcher matcher);

// Trapezoidal area over recall, with the curve extended to recall 0 at the
// precision of the highest-confidence point.
double auc(const std::vector<PRPoint>& points);
double max_f1(const std::vector<PRPoint>& points);

struct EvalReport {
  Matcher matcher = Matcher::kTuple;
  std::size_t predictions = 0;
  std::size_t golds = 0;
  double auc = 0.0;
  double f1 = 0.0;
  double precision = 0.0;  // at the max-F1 point
  double recall = 0.0;
  double threshold = 0.0;
  std::vector<PRPoint> points;
};

EvalReport evaluate(const std::vector<Extraction>& predictions, const std::vector<GoldTuple>& golds,
                    Matcher matcher);

// Extracts every sentence of a corpus with the model and scores the result.
EvalReport evaluate_model(const Model<float>& model, const std::vector<AnnotatedSentence>& corpus, Matcher matcher);

void to_json(nlohmann::json& j, const PRPoint& p);
void to_json(nlohmann::json& j, const EvalReport& r);

}  // namespace m2oie
