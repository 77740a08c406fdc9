#include "m2oie/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "kernels.hpp"

namespace m2oie::ops {
namespace {

template <class T>
void require_rank2(const Tensor<T>& t, const char* op) {
  if (!t.valid()) throw Error(std::string(op) + ": invalid tensor handle");
  const auto& s = t.shape();
  if (s.size() != 1 && s.size() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(s));
  }
}

template <class T>
Graph<T>& owner(const Tensor<T>& a, const Tensor<T>& b) {
  auto& g = a.graph();
  g.check_owner(b);
  return g;
}

Shape mat(std::size_t r, std::size_t c) { return {r, c}; }

}  // namespace

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  auto& g = owner(a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions differ: " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  std::vector<T> out(m * n, T(0));
  kernels::gemm_nn(a.data().data(), b.data().data(), out.data(), m, k, n);
  const auto ia = a.id(), ib = b.id();
  return g.record(mat(m, n), std::move(out), {a, b}, [ia, ib, m, k, n](Graph<T>& g, std::uint32_t self) {
    auto dc = g.grad(self);
    if (g.needs_grad(ia)) {
      auto bt = kernels::transpose(g.value(ib).data(), k, n);
      kernels::gemm_nn(dc.data(), bt.data(), g.grad(ia).data(), m, n, k);
    }
    if (g.needs_grad(ib)) {
      kernels::gemm_tn(g.value(ia).data(), dc.data(), g.grad(ib).data(), m, k, n);
    }
  });
}

template <class T>
Tensor<T> matmul_nt(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank2(a, "matmul_nt");
  require_rank2(b, "matmul_nt");
  auto& g = owner(a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_nt: inner dimensions differ: " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()) + "^T");
  }
  std::vector<T> out(m * n, T(0));
  {
    auto bt = kernels::transpose(b.data().data(), n, k);
    kernels::gemm_nn(a.data().data(), bt.data(), out.data(), m, k, n);
  }
  const auto ia = a.id(), ib = b.id();
  return g.record(mat(m, n), std::move(out), {a, b}, [ia, ib, m, k, n](Graph<T>& g, std::uint32_t self) {
    auto dc = g.grad(self);
    if (g.needs_grad(ia)) {
      kernels::gemm_nn(dc.data(), g.value(ib).data(), g.grad(ia).data(), m, n, k);
    }
    if (g.needs_grad(ib)) {
      kernels::gemm_tn(dc.data(), g.value(ia).data(), g.grad(ib).data(), m, n, k);
    }
  });
}

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank2(a, "add");
  require_rank2(b, "add");
  auto& g = owner(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("add: shapes differ: " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
  auto ad = a.data(), bd = b.data();
  std::vector<T> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] + bd[i];
  const auto ia = a.id(), ib = b.id();
  return g.record(a.shape(), std::move(out), {a, b}, [ia, ib](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    for (auto id : {ia, ib}) {
      if (!g.needs_grad(id)) continue;
      auto gi = g.grad(id);
      for (std::size_t i = 0; i < d.size(); ++i) gi[i] += d[i];
    }
  });
}

template <class T>
Tensor<T> add_row(const Tensor<T>& a, const Tensor<T>& row) {
  require_rank2(a, "add_row");
  require_rank2(row, "add_row");
  auto& g = owner(a, row);
  const std::size_t m = a.rows(), n = a.cols();
  if (row.rows() != 1 || row.cols() != n) {
    throw DimensionError("add_row: cannot broadcast " + shape_string(row.shape()) + " over " +
                         shape_string(a.shape()));
  }
  auto ad = a.data(), rd = row.data();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = ad[i * n + j] + rd[j];
  const auto ia = a.id(), ir = row.id();
  return g.record(mat(m, n), std::move(out), {a, row}, [ia, ir, m, n](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    if (g.needs_grad(ia)) {
      auto ga = g.grad(ia);
      for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i];
    }
    if (g.needs_grad(ir)) {
      auto gr = g.grad(ir);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gr[j] += d[i * n + j];
    }
  });
}

template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  auto y = matmul(x, w);
  return bias.valid() ? add_row(y, bias) : y;
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  require_rank2(a, "scale");
  auto& g = a.graph();
  auto ad = a.data();
  std::vector<T> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * factor;
  const auto ia = a.id();
  return g.record(a.shape(), std::move(out), {a}, [ia, factor](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    auto ga = g.grad(ia);
    for (std::size_t i = 0; i < d.size(); ++i) ga[i] += d[i] * factor;
  });
}

template <class T>
Tensor<T> relu(const Tensor<T>& a) {
  require_rank2(a, "relu");
  auto& g = a.graph();
  auto ad = a.data();
  std::vector<T> out(ad.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] > T(0) ? ad[i] : T(0);
  if (g.track_kinks()) g.note_kinks(ad);
  const auto ia = a.id();
  return g.record(a.shape(), std::move(out), {a}, [ia](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    auto x = g.value(ia);
    auto ga = g.grad(ia);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (x[i] > T(0)) ga[i] += d[i];
  });
}

template <class T>
Tensor<T> softmax_rows(const Tensor<T>& a) {
  require_rank2(a, "softmax_rows");
  auto& g = a.graph();
  const std::size_t m = a.rows(), n = a.cols();
  auto ad = a.data();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const T* x = ad.data() + i * n;
    T* y = out.data() + i * n;
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isnan(x[j])) throw NumericError("softmax_rows: NaN input in row " + std::to_string(i));
      mx = std::max(mx, x[j]);
    }
    if (!std::isfinite(mx)) throw NumericError("softmax_rows: row " + std::to_string(i) + " has no finite entry");
    T z = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) y[j] /= z;
  }
  const auto ia = a.id();
  return g.record(a.shape(), std::move(out), {a}, [ia, m, n](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    auto y = g.value(self);
    auto ga = g.grad(ia);
    for (std::size_t i = 0; i < m; ++i) {
      T dot = T(0);
      for (std::size_t j = 0; j < n; ++j) dot += y[i * n + j] * d[i * n + j];
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += y[i * n + j] * (d[i * n + j] - dot);
    }
  });
}

template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps) {
  require_rank2(x, "layer_norm");
  auto& g = owner(x, gain);
  g.check_owner(bias);
  if (!(eps > T(0))) throw ConfigError("layer_norm: eps must be positive");
  const std::size_t m = x.rows(), n = x.cols();
  if (gain.size() != n || bias.size() != n) {
    throw DimensionError("layer_norm: gain/bias " + shape_string(gain.shape()) + "/" +
                         shape_string(bias.shape()) + " do not match " + shape_string(x.shape()));
  }
  auto xd = x.data(), gd = gain.data(), bd = bias.data();
  auto xhat = std::make_shared<std::vector<T>>(m * n);
  auto rstd = std::make_shared<std::vector<T>>(m);
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const T* row = xd.data() + i * n;
    T mean = T(0);
    for (std::size_t j = 0; j < n; ++j) mean += row[j];
    mean /= static_cast<T>(n);
    T var = T(0);
    for (std::size_t j = 0; j < n; ++j) var += (row[j] - mean) * (row[j] - mean);
    var /= static_cast<T>(n);
    const T r = T(1) / std::sqrt(var + eps);
    (*rstd)[i] = r;
    for (std::size_t j = 0; j < n; ++j) {
      const T h = (row[j] - mean) * r;
      (*xhat)[i * n + j] = h;
      out[i * n + j] = gd[j] * h + bd[j];
    }
  }
  const auto ix = x.id(), ig = gain.id(), ib = bias.id();
  return g.record(mat(m, n), std::move(out), {x, gain, bias},
                  [ix, ig, ib, m, n, xhat, rstd](Graph<T>& g, std::uint32_t self) {
                    auto d = g.grad(self);
                    const auto& h = *xhat;
                    if (g.needs_grad(ig)) {
                      auto gg = g.grad(ig);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < n; ++j) gg[j] += d[i * n + j] * h[i * n + j];
                    }
                    if (g.needs_grad(ib)) {
                      auto gb = g.grad(ib);
                      for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t j = 0; j < n; ++j) gb[j] += d[i * n + j];
                    }
                    if (g.needs_grad(ix)) {
                      auto gain_v = g.value(ig);
                      auto gx = g.grad(ix);
                      std::vector<T> dh(n);
                      for (std::size_t i = 0; i < m; ++i) {
                        T mean_dh = T(0), mean_dh_h = T(0);
                        for (std::size_t j = 0; j < n; ++j) {
                          dh[j] = d[i * n + j] * gain_v[j];
                          mean_dh += dh[j];
                          mean_dh_h += dh[j] * h[i * n + j];
                        }
                        mean_dh /= static_cast<T>(n);
                        mean_dh_h /= static_cast<T>(n);
                        for (std::size_t j = 0; j < n; ++j) {
                          gx[i * n + j] += (*rstd)[i] * (dh[j] - mean_dh - h[i * n + j] * mean_dh_h);
                        }
                      }
                    }
                  });
}

template <class T>
Tensor<T> dropout(const Tensor<T>& x, T rate) {
  require_rank2(x, "dropout");
  auto& g = x.graph();
  if (rate < T(0) || rate >= T(1)) throw ConfigError("dropout: rate must be in [0, 1)");
  if (!g.training() || rate == T(0)) return x;
  const T keep_scale = T(1) / (T(1) - rate);
  auto xd = x.data();
  auto mask = std::make_shared<std::vector<T>>(xd.size());
  std::vector<T> out(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) {
    (*mask)[i] = g.rng().uniform() < static_cast<double>(rate) ? T(0) : keep_scale;
    out[i] = xd[i] * (*mask)[i];
  }
  const auto ix = x.id();
  return g.record(x.shape(), std::move(out), {x}, [ix, mask](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    auto gx = g.grad(ix);
    for (std::size_t i = 0; i < d.size(); ++i) gx[i] += d[i] * (*mask)[i];
  });
}

template <class T>
Tensor<T> gather_rows(const Tensor<T>& a, std::span<const std::size_t> indices) {
  require_rank2(a, "gather_rows");
  auto& g = a.graph();
  const std::size_t rows = a.rows(), n = a.cols();
  if (indices.empty()) throw DimensionError("gather_rows: empty index list");
  auto ad = a.data();
  std::vector<T> out(indices.size() * n);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[r]) +
                           " out of range for " + shape_string(a.shape()));
    }
    std::copy_n(ad.data() + indices[r] * n, n, out.data() + r * n);
  }
  const auto ia = a.id();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return g.record(mat(indices.size(), n), std::move(out), {a},
                  [ia, n, idx = std::move(idx)](Graph<T>& g, std::uint32_t self) {
                    auto d = g.grad(self);
                    auto ga = g.grad(ia);
                    for (std::size_t r = 0; r < idx.size(); ++r)
                      for (std::size_t j = 0; j < n; ++j) ga[idx[r] * n + j] += d[r * n + j];
                  });
}

template <class T>
Tensor<T> mean_rows(const Tensor<T>& a) {
  require_rank2(a, "mean_rows");
  auto& g = a.graph();
  const std::size_t m = a.rows(), n = a.cols();
  auto ad = a.data();
  std::vector<T> out(n, T(0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += ad[i * n + j];
  for (auto& v : out) v /= static_cast<T>(m);
  const auto ia = a.id();
  return g.record(mat(1, n), std::move(out), {a}, [ia, m, n](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    auto ga = g.grad(ia);
    const T inv = T(1) / static_cast<T>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += d[j] * inv;
  });
}

template <class T>
Tensor<T> broadcast_rows(const Tensor<T>& row, std::size_t m) {
  require_rank2(row, "broadcast_rows");
  auto& g = row.graph();
  if (row.rows() != 1) throw DimensionError("broadcast_rows: expected a single row, got " + shape_string(row.shape()));
  const std::size_t n = row.cols();
  auto rd = row.data();
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i) std::copy(rd.begin(), rd.end(), out.begin() + i * n);
  const auto ir = row.id();
  return g.record(mat(m, n), std::move(out), {row}, [ir, m, n](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    auto gr = g.grad(ir);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gr[j] += d[i * n + j];
  });
}

template <class T>
Tensor<T> concat_cols(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: nothing to concatenate");
  auto& g = parts.front().graph();
  const std::size_t m = parts.front().rows();
  std::vector<std::size_t> widths;
  std::vector<std::uint32_t> ids;
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank2(p, "concat_cols");
    g.check_owner(p);
    if (p.rows() != m) {
      throw DimensionError("concat_cols: row count mismatch " + shape_string(parts.front().shape()) +
                           " vs " + shape_string(p.shape()));
    }
    widths.push_back(p.cols());
    ids.push_back(p.id());
    total += p.cols();
  }
  std::vector<T> out(m * total);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto pd = parts[k].data();
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(pd.data() + i * widths[k], widths[k], out.data() + i * total + offset);
    offset += widths[k];
  }
  return g.record(mat(m, total), std::move(out), parts,
                  [ids, widths, m, total](Graph<T>& g, std::uint32_t self) {
                    auto d = g.grad(self);
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                      if (g.needs_grad(ids[k])) {
                        auto gp = g.grad(ids[k]);
                        for (std::size_t i = 0; i < m; ++i)
                          for (std::size_t j = 0; j < widths[k]; ++j)
                            gp[i * widths[k] + j] += d[i * total + off + j];
                      }
                      off += widths[k];
                    }
                  });
}

template <class T>
Tensor<T> slice_cols(const Tensor<T>& a, std::size_t start, std::size_t width) {
  require_rank2(a, "slice_cols");
  auto& g = a.graph();
  const std::size_t m = a.rows(), n = a.cols();
  if (width == 0 || start + width > n) {
    throw DimensionError("slice_cols: [" + std::to_string(start) + ", " +
                         std::to_string(start + width) + ") outside " + shape_string(a.shape()));
  }
  auto ad = a.data();
  std::vector<T> out(m * width);
  for (std::size_t i = 0; i < m; ++i) std::copy_n(ad.data() + i * n + start, width, out.data() + i * width);
  const auto ia = a.id();
  return g.record(mat(m, width), std::move(out), {a}, [ia, m, n, start, width](Graph<T>& g, std::uint32_t self) {
    auto d = g.grad(self);
    auto ga = g.grad(ia);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < width; ++j) ga[i * n + start + j] += d[i * width + j];
  });
}

template <class T>
Tensor<T> sum(const Tensor<T>& a) {
  require_rank2(a, "sum");
  auto& g = a.graph();
  T s = T(0);
  for (auto v : a.data()) s += v;
  const auto ia = a.id();
  return g.record(mat(1, 1), {s}, {a}, [ia](Graph<T>& g, std::uint32_t self) {
    const T d = g.grad(self)[0];
    for (auto& v : g.grad(ia)) v += d;
  });
}

template <class T>
Tensor<T> weighted_sum(std::span<const Tensor<T>> scalars, std::span<const T> weights) {
  if (scalars.empty() || scalars.size() != weights.size()) {
    throw DimensionError("weighted_sum: need equally many (>0) scalars and weights");
  }
  auto& g = scalars.front().graph();
  T s = T(0);
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    g.check_owner(scalars[i]);
    s += weights[i] * scalars[i].item();
    ids.push_back(scalars[i].id());
  }
  std::vector<T> w(weights.begin(), weights.end());
  return g.record(mat(1, 1), {s}, scalars, [ids, w](Graph<T>& g, std::uint32_t self) {
    const T d = g.grad(self)[0];
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (g.needs_grad(ids[i])) g.grad(ids[i])[0] += d * w[i];
  });
}

template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> targets,
                        std::span<const std::uint8_t> keep) {
  require_rank2(logits, "cross_entropy");
  auto& g = logits.graph();
  const std::size_t m = logits.rows(), c = logits.cols();
  if (targets.size() != m || keep.size() != m) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets / " +
                         std::to_string(keep.size()) + " mask entries for logits " +
                         shape_string(logits.shape()));
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!keep[i]) continue;
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= c) {
      throw ValidationError("cross_entropy: target " + std::to_string(targets[i]) + " at row " +
                            std::to_string(i) + " outside [0, " + std::to_string(c) + ")");
    }
    ++count;
  }
  if (count == 0) throw ValidationError("cross_entropy: mask selects no tokens");
  auto ld = logits.data();
  auto probs = std::make_shared<std::vector<T>>(m * c, T(0));
  T loss = T(0);
  for (std::size_t i = 0; i < m; ++i) {
    if (!keep[i]) continue;
    const T* x = ld.data() + i * c;
    T mx = *std::max_element(x, x + c);
    T z = T(0);
    for (std::size_t j = 0; j < c; ++j) z += std::exp(x[j] - mx);
    const T log_z = mx + std::log(z);
    loss += log_z - x[targets[i]];
    for (std::size_t j = 0; j < c; ++j) (*probs)[i * c + j] = std::exp(x[j] - log_z);
  }
  const T inv = T(1) / static_cast<T>(count);
  loss *= inv;
  std::vector<int> tgt(targets.begin(), targets.end());
  std::vector<std::uint8_t> kp(keep.begin(), keep.end());
  const auto il = logits.id();
  return g.record(mat(1, 1), {loss}, {logits},
                  [il, m, c, inv, probs, tgt = std::move(tgt), kp = std::move(kp)](Graph<T>& g, std::uint32_t self) {
                    const T d = g.grad(self)[0] * inv;
                    auto gl = g.grad(il);
                    for (std::size_t i = 0; i < m; ++i) {
                      if (!kp[i]) continue;
                      for (std::size_t j = 0; j < c; ++j) gl[i * c + j] += d * (*probs)[i * c + j];
                      gl[i * c + static_cast<std::size_t>(tgt[i])] -= d;
                    }
                  });
}

#define M2OIE_INSTANTIATE_OPS(T)                                                                \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                \
  template Tensor<T> matmul_nt(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> add_row(const Tensor<T>&, const Tensor<T>&);                               \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> scale(const Tensor<T>&, T);                                                \
  template Tensor<T> relu(const Tensor<T>&);                                                    \
  template Tensor<T> softmax_rows(const Tensor<T>&);                                            \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);       \
  template Tensor<T> dropout(const Tensor<T>&, T);                                              \
  template Tensor<T> gather_rows(const Tensor<T>&, std::span<const std::size_t>);               \
  template Tensor<T> mean_rows(const Tensor<T>&);                                               \
  template Tensor<T> broadcast_rows(const Tensor<T>&, std::size_t);                             \
  template Tensor<T> concat_cols(std::span<const Tensor<T>>);                                   \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);                    \
  template Tensor<T> sum(const Tensor<T>&);                                                     \
  template Tensor<T> weighted_sum(std::span<const Tensor<T>>, std::span<const T>);              \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>, std::span<const std::uint8_t>);

M2OIE_INSTANTIATE_OPS(float)
M2OIE_INSTANTIATE_OPS(double)

#undef M2OIE_INSTANTIATE_OPS

}  // namespace m2oie::ops
