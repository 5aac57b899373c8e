#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spark/datagen/sample.hpp"
#include "spark/fusion/fusion.hpp"
#include "spark/spectral/config.hpp"
#include "spark/spectral/semantic.hpp"
#include "spark/spectral/spectral.hpp"

namespace spark::model {

using numkit::ParameterStore;
using numkit::RealVec;
using numkit::Tape;
using numkit::Var;

struct ForwardOutputs {
  Var z1;       // pixel-path spectral embedding
  Var z2;       // semantic-path spectral embedding
  Var h_fused;  // stored and retrieved
  Var logit;
};

struct Inference {
  RealVec h_fused;
  double logit = 0.0;
};

struct ParameterBreakdown {
  std::vector<std::pair<std::string, std::size_t>> modules;
  std::size_t trainable = 0;
  std::size_t frozen = 0;

  std::size_t total() const { return trainable + frozen; }
};

// The full dual-path detector: pixel path and semantic path, each through
// its spectral path, cross-attention fusion, and the classification head.
// The model describes structure only; values live in a ParameterStore so
// the same model can evaluate a live store and a teacher snapshot.
class SparkModel {
 public:
  SparkModel(spectral::ModelConfig config, spectral::Ablation ablation,
             std::shared_ptr<const spectral::EmbeddingProvider> provider = nullptr);

  ParameterStore make_parameters(std::uint64_t seed) const;

  ForwardOutputs forward(Tape& tape, ParameterStore& store, const Sample& sample) const;
  Inference infer(ParameterStore& store, const Sample& sample) const;

  // Analytic count; needs no parameter store.
  ParameterBreakdown parameter_breakdown() const;

  const spectral::ModelConfig& config() const { return config_; }
  const spectral::Ablation& ablation() const { return ablation_; }
  const fusion::CrossAttention& cross_attention() const { return cross_; }
  const fusion::FusionHead& head() const { return head_; }
  const std::optional<spectral::SpectralPath>& pixel_spectral() const { return pixel_spectral_; }
  const std::optional<spectral::SpectralPath>& semantic_spectral() const { return semantic_spectral_; }

 private:
  spectral::ModelConfig config_;
  spectral::Ablation ablation_;
  spectral::PixelPath pixel_;
  spectral::SemanticEncoder semantic_;
  std::optional<spectral::SpectralPath> pixel_spectral_;
  std::optional<spectral::SpectralPath> semantic_spectral_;
  fusion::CrossAttention cross_;
  fusion::FusionHead head_;
};

}  // namespace spark::model
