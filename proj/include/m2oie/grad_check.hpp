#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "m2oie/tensor.hpp"

namespace m2oie {

struct GradCheckOptions {
  double step = 1e-5;  // central-difference h, must lie in [1e-6, 1e-4]
  // Entries checked per tensor; 0 checks every entry.
  std::size_t max_entries_per_tensor = 0;
  std::uint64_t sample_seed = 0;
  // Seed for the graph RNG; every evaluation reuses it, so any dropout masks
  // are identical between the analytic and numeric passes.
  std::uint64_t graph_seed = 0;
  Mode mode = Mode::kEval;
  // Lower bound on the relative-error denominator.
  double denominator_floor = 1e-6;
  // Central differences are meaningless for an entry whose +-h evaluations
  // flip any ReLU input across zero. Such entries are skipped (and, when
  // sampling, replaced by another entry of the same tensor).
  bool skip_kinks = true;
  // Hook applied to the analytic gradients before comparison (fault injection).
  std::function<void(std::span<Parameter<double>* const>)> corrupt;
};

struct TensorGradError {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double max_rel_error = 0.0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t entries_checked = 0;
  std::size_t entries_skipped = 0;  // straddled a ReLU kink
  std::vector<TensorGradError> per_tensor;
};

using ScalarFn = std::function<Tensor<double>(Graph<double>&)>;

// Compares backward() gradients of a scalar-valued graph builder against
// central differences (f(x+h) - f(x-h)) / 2h for the given parameters.
// Relative error per entry: |a - n| / max(|a| + |n|, floor).
GradCheckResult grad_check(const ScalarFn& f, std::span<Parameter<double>* const> params,
                           const GradCheckOptions& options = {});

}  // namespace m2oie
