#pragma once

#include <string>

#include "spark/numkit/init.hpp"
#include "spark/numkit/params.hpp"
#include "spark/numkit/tape.hpp"
#include "spark/numkit/tensor.hpp"
#include "spark/spectral/config.hpp"

namespace spark::fusion {

using numkit::ParameterStore;
using numkit::RealVec;
using numkit::Rng;
using numkit::Tape;
using numkit::Var;

// Multi-head cross-attention between two spectral embeddings, each viewed
// as four band tokens of width band_dim. Queries come from z1, keys and
// values from z2; the result includes the z1 residual.
class CrossAttention {
 public:
  CrossAttention(std::string prefix, const spectral::ModelConfig& config);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, ParameterStore& store, Var z1, Var z2) const;
  std::size_t parameter_count() const { return 4 * (band_dim_ * band_dim_ + band_dim_); }

  // Per-head attention weights (tokens x tokens) for inspection.
  RealVec weights(ParameterStore& store, std::span<const double> z1, std::span<const double> z2,
                  std::size_t head) const;

  // Names of all eight projection tensors (q, k, v, o weights and biases).
  std::vector<std::string> parameter_names() const;
  std::size_t heads() const { return heads_; }

 private:
  std::string name(const char* proj, const char* kind) const { return prefix_ + "." + proj + "." + kind; }

  std::string prefix_;
  std::size_t d_model_;
  std::size_t band_dim_;
  std::size_t heads_;
};

// h_cross + w * z1 + w * z2
Var fuse(Var h_cross, Var z1, Var z2, double residual_weight);
RealVec fuse(std::span<const double> h_cross, std::span<const double> z1, std::span<const double> z2,
             double residual_weight);

// d_model -> proj_dim (silu) -> 1 logit.
class FusionHead {
 public:
  FusionHead(std::string prefix, const spectral::ModelConfig& config);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, ParameterStore& store, Var h_fused) const;
  std::size_t projection_parameter_count() const { return proj_dim_ * d_model_ + proj_dim_; }
  std::size_t classifier_parameter_count() const { return proj_dim_ + 1; }

  std::vector<std::string> parameter_names() const;

 private:
  std::string prefix_;
  std::size_t d_model_;
  std::size_t proj_dim_;
};

}  // namespace spark::fusion
