#include "spark/numkit/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "spark/error.hpp"

namespace spark::numkit {
namespace {

double checked(double v, const char* where) {
  require(std::isfinite(v), ErrorKind::kNumeric, std::string("grad_check: non-finite loss at ") + where);
  return v;
}

}  // namespace

GradCheckResult grad_check(ParameterStore& params, const LossFn& loss, const GradCheckOptions& options) {
  require(options.eps >= 1e-7 && options.eps <= 1e-4, ErrorKind::kInvalidInput,
          "grad_check: eps must lie in [1e-7, 1e-4]");
  params.zero_grad();
  checked(loss(params), "base point");
  ParameterStore analytic = params.snapshot();
  params.zero_grad();

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (auto& [name, entry] : params) {
    if (!entry.trainable) continue;
    std::vector<std::size_t> indices(entry.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (indices.size() > options.samples_per_entry) {
      std::shuffle(indices.begin(), indices.end(), rng);
      indices.resize(options.samples_per_entry);
    }
    const auto& grad = analytic.at(name).grad;
    for (std::size_t idx : indices) {
      const double original = entry.value[idx];
      entry.value[idx] = original + options.eps;
      const double plus = checked(loss(params), "+eps probe");
      entry.value[idx] = original - options.eps;
      const double minus = checked(loss(params), "-eps probe");
      entry.value[idx] = original;
      params.zero_grad();
      const double numeric = (plus - minus) / (2.0 * options.eps);
      const double err = std::abs(grad[idx] - numeric) / std::max(1.0, std::abs(numeric));
      ++result.probes;
      if (err >= result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_entry = name;
        result.worst_index = idx;
      }
    }
  }
  // Leave the analytic gradient in place for the caller.
  for (auto& [name, entry] : params) entry.grad = analytic.at(name).grad;
  return result;
}

}  // namespace spark::numkit
