#include "m2oie/evaluator.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "m2oie/error.hpp"

namespace m2oie {
namespace {

std::size_t overlap(const Span& a, const Span& b) {
  std::size_t n = 0;
  for (auto i : a)
    if (std::find(b.begin(), b.end(), i) != b.end()) ++n;
  return n;
}

const Span kEmpty;

const Span& slot_or_empty(const std::optional<Span>& s) { return s ? *s : kEmpty; }

}  // namespace

std::vector<GoldTuple> gold_tuples(const std::vector<AnnotatedSentence>& corpus) {
  std::vector<GoldTuple> out;
  for (const auto& s : corpus)
    for (const auto& t : s.tuples) out.push_back({s.id, t.predicate, t.args});
  return out;
}

bool lexical_match(const Extraction& pred, const GoldTuple& gold) {
  auto covered = [](const Span& g, const Span& p) { return 2 * overlap(g, p) >= g.size(); };
  if (!covered(gold.predicate, pred.predicate)) return false;
  for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
    if (!gold.args[slot]) continue;
    if (!covered(*gold.args[slot], slot_or_empty(pred.args[slot]))) return false;
  }
  return true;
}

MatchCredit tuple_match_score(const Extraction& pred, const GoldTuple& gold) {
  const std::size_t pred_overlap = overlap(pred.predicate, gold.predicate);
  if (pred_overlap == 0) return {};
  std::size_t matched = pred_overlap;
  std::size_t n_pred = pred.predicate.size();
  std::size_t n_gold = gold.predicate.size();
  for (std::size_t slot = 0; slot < kNumArgSlots; ++slot) {
    const auto& p = slot_or_empty(pred.args[slot]);
    const auto& g = slot_or_empty(gold.args[slot]);
    matched += overlap(p, g);
    n_pred += p.size();
    n_gold += g.size();
  }
  return {static_cast<double>(matched) / static_cast<double>(n_pred),
          static_cast<double>(matched) / static_cast<double>(n_gold)};
}

Matcher parse_matcher(std::string_view name) {
  if (name == "lexical") return Matcher::kLexical;
  if (name == "tuple") return Matcher::kTuple;
  throw ConfigError("unknown matcher '" + std::string(name) + "' (expected lexical or tuple)");
}

std::string matcher_name(Matcher m) { return m == Matcher::kLexical ? "lexical" : "tuple"; }

std::vector<PRPoint> pr_curve(const std::vector<Extraction>& predictions, const std::vector<GoldTuple>& golds,
                              Matcher matcher) {
  if (golds.empty()) throw ValidationError("pr_curve: no gold tuples");
  if (predictions.empty()) return {PRPoint{0.0, 0.0, 0.0}};

  std::vector<std::size_t> order(predictions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predictions[a].confidence > predictions[b].confidence;
  });

  std::map<std::string, std::vector<std::size_t>> by_sentence;
  for (std::size_t g = 0; g < golds.size(); ++g) by_sentence[golds[g].sentence_id].push_back(g);
  std::vector<bool> consumed(golds.size(), false);

  std::vector<PRPoint> points;
  double precision_sum = 0.0, recall_sum = 0.0;
  const double n_gold = static_cast<double>(golds.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Extraction& e = predictions[order[k]];
    auto it = by_sentence.find(e.sentence_id);
    if (it != by_sentence.end()) {
      std::ptrdiff_t best = -1;
      MatchCredit best_credit;
      double best_key = 0.0;
      for (auto g : it->second) {
        if (consumed[g]) continue;
        const MatchCredit c = tuple_match_score(e, golds[g]);
        if (matcher == Matcher::kLexical ? !lexical_match(e, golds[g]) : c.precision + c.recall <= 0.0) continue;
        const double key = c.precision + c.recall;
        if (best < 0 || key > best_key) {
          best = static_cast<std::ptrdiff_t>(g);
          best_key = key;
          best_credit = c;
        }
      }
      if (best >= 0) {
        consumed[static_cast<std::size_t>(best)] = true;
        if (matcher == Matcher::kLexical) {
          precision_sum += 1.0;
          recall_sum += 1.0;
        } else {
          precision_sum += best_credit.precision;
          recall_sum += best_credit.recall;
        }
      }
    }
    const bool last_of_threshold =
        k + 1 == order.size() || predictions[order[k + 1]].confidence != e.confidence;
    if (last_of_threshold) {
      const double kept = static_cast<double>(k + 1);
      points.push_back({e.confidence, precision_sum / kept, recall_sum / n_gold});
    }
  }
  return points;
}

double auc(const std::vector<PRPoint>& points) {
  if (points.empty()) throw ValidationError("auc: no points");
  std::vector<PRPoint> sorted = points;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const PRPoint& a, const PRPoint& b) { return a.recall < b.recall; });
  double area = 0.0;
  double r0 = 0.0, p0 = points.front().precision;
  for (const auto& p : sorted) {
    area += (p.recall - r0) * (p.precision + p0) / 2.0;
    r0 = p.recall;
    p0 = p.precision;
  }
  return area;
}

double max_f1(const std::vector<PRPoint>& points) {
  double best = 0.0;
  for (const auto& p : points) {
    const double s = p.precision + p.recall;
    if (s > 0.0) best = std::max(best, 2.0 * p.precision * p.recall / s);
  }
  return best;
}

EvalReport evaluate(const std::vector<Extraction>& predictions, const std::vector<GoldTuple>& golds,
                    Matcher matcher) {
  EvalReport r;
  r.matcher = matcher;
  r.predictions = predictions.size();
  r.golds = golds.size();
  r.points = pr_curve(predictions, golds, matcher);
  r.auc = auc(r.points);
  r.f1 = max_f1(r.points);
  double best = -1.0;
  for (const auto& p : r.points) {
    const double s = p.precision + p.recall;
    const double f = s > 0.0 ? 2.0 * p.precision * p.recall / s : 0.0;
    if (f > best) {
      best = f;
      r.precision = p.precision;
      r.recall = p.recall;
      r.threshold = p.threshold;
    }
  }
  return r;
}

EvalReport evaluate_model(const Model<float>& model, const std::vector<AnnotatedSentence>& corpus,
                          Matcher matcher) {
  std::vector<Extraction> all;
  for (const auto& s : corpus) {
    auto ex = extract_sentence(model, make_sentence(s.tokens, model.vocab()), s.id);
    all.insert(all.end(), ex.begin(), ex.end());
  }
  return evaluate(all, gold_tuples(corpus), matcher);
}

void to_json(nlohmann::json& j, const PRPoint& p) {
  j = nlohmann::json{{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}};
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"matcher", matcher_name(r.matcher)},
                     {"predictions", r.predictions},
                     {"golds", r.golds},
                     {"auc", r.auc},
                     {"f1", r.f1},
                     {"precision", r.precision},
                     {"recall", r.recall},
                     {"threshold", r.threshold},
                     {"points", r.points}};
}

}  // namespace m2oie
