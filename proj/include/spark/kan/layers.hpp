#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "spark/kan/spline.hpp"
#include "spark/numkit/init.hpp"
#include "spark/numkit/params.hpp"
#include "spark/numkit/tape.hpp"

namespace spark::kan {

using numkit::ParameterStore;
using numkit::Rng;
using numkit::Tape;
using numkit::Var;

// out[o] = sum_i base[o,i] * silu(h[i]) + sum_m coeffs[o,i,m] * B_m(h[i])
// coeffs is stored as (out_dim) x (in_dim * n_basis).
Var kan_expert_op(Var h, Var coeffs, Var base_weight, const SplineGrid& grid);

// One spline-parameterized expert. Parameters live in a ParameterStore
// under `<prefix>.coeffs` and `<prefix>.base`.
class KanExpert {
 public:
  KanExpert(std::string prefix, std::size_t in_dim, std::size_t out_dim, SplineGrid grid);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, ParameterStore& store, Var h) const;
  std::size_t parameter_count() const;

  const std::string& coeffs_name() const { return coeffs_name_; }
  const std::string& base_name() const { return base_name_; }
  const SplineGrid& grid() const { return grid_; }

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  SplineGrid grid_;
  std::string coeffs_name_;
  std::string base_name_;
};

// softmax(W h + b) over E experts.
class MoeGate {
 public:
  MoeGate(std::string prefix, std::size_t band_dim, std::size_t n_experts);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, ParameterStore& store, Var h) const;
  std::size_t parameter_count() const { return n_experts_ * band_dim_ + n_experts_; }

  const std::string& weight_name() const { return weight_name_; }
  const std::string& bias_name() const { return bias_name_; }

 private:
  std::size_t band_dim_;
  std::size_t n_experts_;
  std::string weight_name_;
  std::string bias_name_;
};

// Per-band transform. Implementations: gated KAN experts, or a dense layer
// for the MLP ablation.
class BandLayer {
 public:
  virtual ~BandLayer() = default;
  virtual void init(ParameterStore& store, Rng& rng) const = 0;
  virtual Var forward(Tape& tape, ParameterStore& store, Var h) const = 0;
  virtual std::size_t parameter_count() const = 0;
};

// h_kan = W h + sum_e alpha_e(h) * Expert_e(s * h + t)
//
// The elementwise pre-scale (s, t) maps log-magnitude inputs toward the
// spline span; the base term and the gate see the raw band.
class KanBandLayer final : public BandLayer {
 public:
  KanBandLayer(std::string prefix, std::size_t band_dim, std::size_t n_experts, SplineGrid grid);

  void init(ParameterStore& store, Rng& rng) const override;
  Var forward(Tape& tape, ParameterStore& store, Var h) const override;
  std::size_t parameter_count() const override;

  const std::string& base_name() const { return base_name_; }
  const std::string& prescale_scale_name() const { return scale_name_; }
  const std::string& prescale_shift_name() const { return shift_name_; }
  const std::vector<KanExpert>& experts() const { return experts_; }
  const MoeGate& gate() const { return gate_; }

 private:
  std::size_t band_dim_;
  std::string base_name_;
  std::string scale_name_;
  std::string shift_name_;
  std::vector<KanExpert> experts_;
  MoeGate gate_;
};

// silu(W h + b), the dense stand-in used when KAN layers are ablated.
class DenseBandLayer final : public BandLayer {
 public:
  DenseBandLayer(std::string prefix, std::size_t band_dim);

  void init(ParameterStore& store, Rng& rng) const override;
  Var forward(Tape& tape, ParameterStore& store, Var h) const override;
  std::size_t parameter_count() const override { return band_dim_ * band_dim_ + band_dim_; }

 private:
  std::size_t band_dim_;
  std::string weight_name_;
  std::string bias_name_;
};

}  // namespace spark::kan
