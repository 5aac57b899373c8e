#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "spark/numkit/params.hpp"

namespace spark::numkit {

// Evaluates a scalar loss at the store's current values and accumulates its
// analytic gradient into ParamEntry::grad (grads are zeroed by the caller).
using LossFn = std::function<double(ParameterStore&)>;

struct GradCheckOptions {
  double eps = 1e-6;
  // Coordinates probed per entry; entries at or below this size are probed
  // exhaustively, larger ones at seeded random positions.
  std::size_t samples_per_entry = 16;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_entry;
  std::size_t worst_index = 0;
  std::size_t probes = 0;
};

// Compares analytic gradients against central differences over trainable
// entries. The error for one coordinate is |analytic - numeric| / max(1, |numeric|).
GradCheckResult grad_check(ParameterStore& params, const LossFn& loss, const GradCheckOptions& options = {});

}  // namespace spark::numkit
