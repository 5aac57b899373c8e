#pragma once

#include <map>
#include <string>
#include <vector>

#include "spark/numkit/params.hpp"

namespace spark::numkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moment estimates, keyed by parameter name.
struct AdamState {
  std::map<std::string, std::vector<double>, std::less<>> m;
  std::map<std::string, std::vector<double>, std::less<>> v;
};

// One bias-corrected Adam update at step t >= 1. Frozen entries are left
// untouched, including their moments.
void adam_step(ParameterStore& params, AdamState& state, const AdamConfig& config, long t);

class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(ParameterStore& params) { adam_step(params, state_, config_, ++t_); }
  long steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  AdamState state_;
  long t_ = 0;
};

}  // namespace spark::numkit
