#include "spark/numkit/adam.hpp"

#include <cmath>

#include "spark/error.hpp"

namespace spark::numkit {

void adam_step(ParameterStore& params, AdamState& state, const AdamConfig& config, long t) {
  require(t >= 1, ErrorKind::kInvalidInput, "adam_step: t must be >= 1, got " + std::to_string(t));
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (auto& [name, entry] : params) {
    if (!entry.trainable) continue;
    auto& m = state.m[name];
    auto& v = state.v[name];
    if (m.size() != entry.size()) m.assign(entry.size(), 0.0);
    if (v.size() != entry.size()) v.assign(entry.size(), 0.0);
    for (std::size_t i = 0; i < entry.size(); ++i) {
      const double g = entry.grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      entry.value[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace spark::numkit
