#include "m2oie/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace m2oie {
namespace {

struct Evaluation {
  double value;
  std::uint64_t kinks;
};

Evaluation evaluate(const ScalarFn& f, const GradCheckOptions& o, bool with_grad) {
  Graph<double> g(o.mode, o.graph_seed);
  g.set_grad_enabled(with_grad);
  g.set_track_kinks(o.skip_kinks);
  auto out = f(g);
  if (out.size() != 1) {
    throw DimensionError("grad_check: function output must be scalar, got " +
                         shape_string(out.shape()));
  }
  if (with_grad) g.backward(out);
  return {out.item(), g.kink_signature()};
}

// Candidate order: every entry in index order, or a seeded shuffle when
// sampling (the first `limit` usable ones are checked).
std::vector<std::size_t> candidates(std::size_t n, std::size_t limit, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (limit != 0 && n > limit) rng.shuffle(idx);
  return idx;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, std::span<Parameter<double>* const> params,
                           const GradCheckOptions& o) {
  if (!(o.step >= 1e-6 && o.step <= 1e-4)) {
    throw ConfigError("grad_check: step must lie in [1e-6, 1e-4]");
  }
  for (auto* p : params) p->zero_grad();
  const auto base = evaluate(f, o, true);
  if (o.corrupt) o.corrupt(params);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (auto* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  Rng rng(o.sample_seed);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& p = *params[t];
    TensorGradError te;
    te.name = p.name;
    const std::size_t quota = o.max_entries_per_tensor == 0 ? p.size() : o.max_entries_per_tensor;
    for (auto i : candidates(p.size(), o.max_entries_per_tensor, rng)) {
      if (te.checked == quota) break;
      const double saved = p.value[i];
      p.value[i] = saved + o.step;
      const auto up = evaluate(f, o, false);
      p.value[i] = saved - o.step;
      const auto down = evaluate(f, o, false);
      p.value[i] = saved;
      if (o.skip_kinks && (up.kinks != base.kinks || down.kinks != base.kinks)) {
        ++te.skipped;
        ++result.entries_skipped;
        continue;
      }
      const double numeric = (up.value - down.value) / (2.0 * o.step);
      const double a = analytic[t][i];
      const double denom = std::max(std::abs(a) + std::abs(numeric), o.denominator_floor);
      const double err = std::abs(a - numeric) / denom;
      ++te.checked;
      te.max_rel_error = std::max(te.max_rel_error, err);
      if (err > result.max_rel_error || result.entries_checked == 0) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        result.worst_tensor = p.name;
        result.worst_index = i;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
      ++result.entries_checked;
    }
    result.per_tensor.push_back(te);
  }
  for (auto* p : params) p->zero_grad();
  return result;
}

}  // namespace m2oie
