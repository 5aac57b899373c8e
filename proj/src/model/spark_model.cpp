#include "spark/model/spark_model.hpp"

#include "spark/error.hpp"

namespace spark::model {

SparkModel::SparkModel(spectral::ModelConfig config, spectral::Ablation ablation,
                       std::shared_ptr<const spectral::EmbeddingProvider> provider)
    : config_((config.validate(), config)),
      ablation_(ablation),
      pixel_("pixel", config_),
      semantic_(config_, provider ? std::move(provider)
                                  : std::make_shared<spectral::FrozenRandomPatchEncoder>(config_)),
      cross_("xattn", config_),
      head_("head", config_) {
  if (!ablation_.disable_pixel_fft) pixel_spectral_.emplace("spec_pix", config_, ablation_.use_mlp_instead_of_kan);
  if (!ablation_.disable_feature_fft) {
    semantic_spectral_.emplace("spec_sem", config_, ablation_.use_mlp_instead_of_kan);
  }
}

ParameterStore SparkModel::make_parameters(std::uint64_t seed) const {
  ParameterStore store;
  // Separate streams per component keep initialization stable when an
  // ablation removes a component.
  numkit::Rng pixel_rng(numkit::mix_seed(seed, 1));
  numkit::Rng semantic_rng(numkit::mix_seed(seed, 2));
  numkit::Rng spec_pix_rng(numkit::mix_seed(seed, 3));
  numkit::Rng spec_sem_rng(numkit::mix_seed(seed, 4));
  numkit::Rng cross_rng(numkit::mix_seed(seed, 5));
  numkit::Rng head_rng(numkit::mix_seed(seed, 6));
  pixel_.init(store, pixel_rng);
  semantic_.init(store, semantic_rng);
  if (pixel_spectral_) pixel_spectral_->init(store, spec_pix_rng);
  if (semantic_spectral_) semantic_spectral_->init(store, spec_sem_rng);
  cross_.init(store, cross_rng);
  head_.init(store, head_rng);
  return store;
}

ForwardOutputs SparkModel::forward(Tape& tape, ParameterStore& store, const Sample& sample) const {
  ForwardOutputs out;
  const Var h_rgb = pixel_.forward(tape, store, sample.pixels);
  out.z1 = pixel_spectral_ ? pixel_spectral_->forward(tape, store, h_rgb) : h_rgb;
  const Var h_vit = semantic_.forward(tape, store, sample);
  out.z2 = semantic_spectral_ ? semantic_spectral_->forward(tape, store, h_vit) : h_vit;
  const Var h_cross = cross_.forward(tape, store, out.z1, out.z2);
  out.h_fused = fusion::fuse(h_cross, out.z1, out.z2, config_.residual_weight);
  out.logit = head_.forward(tape, store, out.h_fused);
  return out;
}

Inference SparkModel::infer(ParameterStore& store, const Sample& sample) const {
  Tape tape(false);
  const ForwardOutputs out = forward(tape, store, sample);
  Inference result;
  result.h_fused.assign(out.h_fused.value().begin(), out.h_fused.value().end());
  result.logit = out.logit.scalar();
  return result;
}

ParameterBreakdown SparkModel::parameter_breakdown() const {
  ParameterBreakdown b;
  b.modules.emplace_back("pixel_path", pixel_.parameter_count());
  b.modules.emplace_back("semantic_trunk_frozen", semantic_.frozen_parameter_count());
  b.modules.emplace_back("semantic_tail", semantic_.trainable_parameter_count());
  b.modules.emplace_back("spectral_pixel", pixel_spectral_ ? pixel_spectral_->parameter_count() : 0);
  b.modules.emplace_back("spectral_semantic", semantic_spectral_ ? semantic_spectral_->parameter_count() : 0);
  b.modules.emplace_back("cross_attention", cross_.parameter_count());
  b.modules.emplace_back("projection_head", head_.projection_parameter_count());
  b.modules.emplace_back("classifier", head_.classifier_parameter_count());
  b.frozen = semantic_.frozen_parameter_count();
  for (const auto& [name, count] : b.modules) b.trainable += count;
  b.trainable -= b.frozen;
  return b;
}

}  // namespace spark::model
