#pragma once

#include <cmath>
#include <vector>

#include "m2oie/argument_extractor.hpp"
#include "m2oie/encoder.hpp"
#include "m2oie/rng.hpp"

namespace m2oie::testing {

using Mat = std::vector<std::vector<double>>;

inline double w(const Parameter<double>& p, std::size_t r, std::size_t c) { return p.value[r * p.cols() + c]; }

inline void layer_norm_rows(Mat& x, const Parameter<double>& gain, const Parameter<double>& bias) {
  for (auto& row : x) {
    const double n = static_cast<double>(row.size());
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : row) var += (v - mean) * (v - mean);
    var /= n;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean) * inv * gain.value[j] + bias.value[j];
  }
}

// Element-by-element evaluation of one attention block, written with plain
// loops and no shared code with the tensor library.
inline Mat brute_force_block(const Mat& x, const std::vector<std::size_t>& span, const AttentionBlockParams<double>& p,
                             std::size_t heads) {
  const std::size_t l = x.size(), d = x[0].size(), np = span.size(), dh = d / heads;
  Mat q(l, std::vector<double>(d, 0.0)), k(np, std::vector<double>(d, 0.0)), v(np, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t r = 0; r < d; ++r) q[i][c] += x[i][r] * w(*p.wq, r, c);
  for (std::size_t j = 0; j < np; ++j)
    for (std::size_t c = 0; c < d; ++c)
      for (std::size_t r = 0; r < d; ++r) {
        k[j][c] += x[span[j]][r] * w(*p.wk, r, c);
        v[j][c] += x[span[j]][r] * w(*p.wv, r, c);
      }
  Mat z(l, std::vector<double>(d, 0.0));
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < l; ++i) {
      std::vector<double> s(np, 0.0);
      for (std::size_t j = 0; j < np; ++j) {
        for (std::size_t c = 0; c < dh; ++c) s[j] += q[i][h * dh + c] * k[j][h * dh + c];
        s[j] /= std::sqrt(static_cast<double>(dh));
      }
      double mx = s[0];
      for (double e : s) mx = std::max(mx, e);
      double total = 0.0;
      for (double& e : s) total += (e = std::exp(e - mx));
      for (std::size_t j = 0; j < np; ++j)
        for (std::size_t c = 0; c < dh; ++c) z[i][h * dh + c] += s[j] / total * v[j][h * dh + c];
    }
  }
  Mat y(l, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      double a = p.bo->value[c];
      for (std::size_t r = 0; r < d; ++r) a += z[i][r] * w(*p.wo, r, c);
      y[i][c] = x[i][c] + a;
    }
  layer_norm_rows(y, *p.ln1_gain, *p.ln1_bias);
  const std::size_t f = p.w1->cols();
  Mat out(l, std::vector<double>(d, 0.0));
  for (std::size_t i = 0; i < l; ++i) {
    std::vector<double> hid(f, 0.0);
    for (std::size_t c = 0; c < f; ++c) {
      double a = p.b1->value[c];
      for (std::size_t r = 0; r < d; ++r) a += y[i][r] * w(*p.w1, r, c);
      hid[c] = a > 0.0 ? a : 0.0;
    }
    for (std::size_t c = 0; c < d; ++c) {
      double a = p.b2->value[c];
      for (std::size_t r = 0; r < f; ++r) a += hid[r] * w(*p.w2, r, c);
      out[i][c] = y[i][c] + a;
    }
  }
  layer_norm_rows(out, *p.ln2_gain, *p.ln2_bias);
  return out;
}

// Fills every parameter of a block (including gains and biases) with N(0, 1)
// scaled draws so the oracle sees non-trivial values everywhere.
inline void randomize_block(AttentionBlockParams<double>& p, Rng& rng) {
  for (auto* q : {p.wq, p.wk, p.wv, p.wo, p.bo, p.ln1_gain, p.ln1_bias, p.w1, p.b1, p.w2, p.b2, p.ln2_gain, p.ln2_bias})
    for (auto& v : q->value) v = rng.normal(0.0, 0.7);
}

struct OracleResult {
  double max_abs_diff = 0.0;
  std::size_t instances = 0;
};

// Random instances with l <= 6, p <= 3 and d_mh <= 12; returns the largest
// elementwise gap between mh_block and the loop oracle.
inline OracleResult run_block_oracle(std::size_t instances, std::uint64_t seed) {
  Rng rng(seed);
  OracleResult res;
  const std::size_t dims[] = {2, 3, 4, 6, 8, 9, 10, 12};
  for (std::size_t it = 0; it < instances; ++it) {
    const std::size_t l = 1 + rng.below(6);
    const std::size_t d = dims[rng.below(8)];
    std::vector<std::size_t> divisors;
    for (std::size_t h = 1; h <= d; ++h)
      if (d % h == 0 && h <= 4) divisors.push_back(h);
    const std::size_t heads = divisors[rng.below(divisors.size())];
    const std::size_t np = 1 + rng.below(std::min<std::size_t>(3, l));
    const std::size_t start = rng.below(l - np + 1);
    std::vector<std::size_t> span;
    for (std::size_t j = 0; j < np; ++j) span.push_back(start + j);

    ParameterStore<double> store;
    auto p = AttentionBlockParams<double>::create(store, "b", d, 1 + rng.below(2 * d));
    randomize_block(p, rng);
    Mat x(l, std::vector<double>(d));
    std::vector<double> flat;
    for (auto& row : x)
      for (auto& v : row) flat.push_back(v = rng.normal());

    Graph<double> g(Mode::kEval);
    auto out = mh_block(g.constant({l, d}, flat), span, p, heads, 0.0);
    const auto ref = brute_force_block(x, span, p, heads);
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t c = 0; c < d; ++c)
        res.max_abs_diff = std::max(res.max_abs_diff, std::abs(out.at(i, c) - ref[i][c]));
    ++res.instances;
  }
  return res;
}

}  // namespace m2oie::testing
