#include "spark/numkit/math.hpp"

#include <algorithm>
#include <cmath>

#include "spark/error.hpp"

namespace spark::numkit {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silu(double x) { return x * sigmoid(x); }

double silu_derivative(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

RealVec softmax(std::span<const double> logits) {
  require(!logits.empty(), ErrorKind::kInvalidInput, "softmax of an empty vector");
  const double peak = *std::max_element(logits.begin(), logits.end());
  RealVec out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

RealVec layer_norm(std::span<const double> v, std::span<const double> gain, std::span<const double> bias,
                   double eps) {
  require(!v.empty() && gain.size() == v.size() && bias.size() == v.size(), ErrorKind::kInvalidInput,
          "layer_norm: shape mismatch");
  require(eps >= 0.0, ErrorKind::kInvalidInput, "layer_norm: eps must be nonnegative");
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  var /= n;
  const double denom = var + eps;
  const double inv_std = denom > 0.0 ? 1.0 / std::sqrt(denom) : 0.0;
  RealVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - mean) * inv_std * gain[i] + bias[i];
  return out;
}

double bce_with_logits(double logit, int label) {
  if (!(label == 0 || label == 1)) {
    fail(ErrorKind::kInvalidInput, "bce_with_logits: label must be 0 or 1, got " + std::to_string(label));
  }
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

}  // namespace spark::numkit
