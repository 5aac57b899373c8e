#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "spark/kan/layers.hpp"
#include "spark/numkit/tensor.hpp"
#include "spark/spectral/config.hpp"

namespace spark::spectral {

using numkit::ParameterStore;
using numkit::RealVec;
using numkit::Rng;
using numkit::Tape;
using numkit::Var;

// Contiguous quarter slices of a spectrum.
std::array<RealVec, kBands> band_partition(std::span<const double> h_freq);

// FFT -> log-magnitude -> four bands -> per-band layer -> concat -> dense
// projection -> layer norm.
class MultiBandBlock {
 public:
  MultiBandBlock(std::string prefix, const ModelConfig& config, bool use_mlp);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, ParameterStore& store, Var h) const;
  std::size_t parameter_count() const;

  const kan::BandLayer& band(std::size_t b) const { return *bands_[b]; }
  const std::string& proj_weight_name() const { return proj_w_; }
  const std::string& proj_bias_name() const { return proj_b_; }
  const std::string& norm_gain_name() const { return norm_gain_; }
  const std::string& norm_bias_name() const { return norm_bias_; }

 private:
  std::size_t d_model_;
  double eps_;
  std::vector<std::unique_ptr<kan::BandLayer>> bands_;
  std::string proj_w_;
  std::string proj_b_;
  std::string norm_gain_;
  std::string norm_bias_;
};

// blocks_per_path blocks with a layer norm between consecutive blocks.
class SpectralPath {
 public:
  SpectralPath(std::string prefix, const ModelConfig& config, bool use_mlp);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, ParameterStore& store, Var h) const;
  std::size_t parameter_count() const;

  const std::vector<MultiBandBlock>& blocks() const { return blocks_; }
  const std::string& inter_norm_gain_name(std::size_t i) const { return norm_gain_[i]; }
  const std::string& inter_norm_bias_name(std::size_t i) const { return norm_bias_[i]; }

 private:
  std::size_t d_model_;
  double eps_;
  std::vector<MultiBandBlock> blocks_;
  std::vector<std::string> norm_gain_;
  std::vector<std::string> norm_bias_;
};

// Flattened image -> d_model by a dense affine map.
class PixelPath {
 public:
  PixelPath(std::string prefix, const ModelConfig& config);

  void init(ParameterStore& store, Rng& rng) const;
  // Validates pixel count and range before recording.
  Var forward(Tape& tape, ParameterStore& store, std::span<const double> pixels) const;
  std::size_t parameter_count() const { return d_model_ * pixel_count_ + d_model_; }

  const std::string& weight_name() const { return weight_; }
  const std::string& bias_name() const { return bias_; }

 private:
  std::size_t d_model_;
  std::size_t pixel_count_;
  std::string weight_;
  std::string bias_;
};

}  // namespace spark::spectral
