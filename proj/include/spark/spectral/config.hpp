#pragma once

#include <cstddef>

namespace spark::spectral {

inline constexpr std::size_t kBands = 4;

// Architecture hyperparameters shared by every module of the model.
struct ModelConfig {
  std::size_t d_model = 768;
  std::size_t n_experts = 4;
  std::size_t n_heads = 12;
  std::size_t blocks_per_path = 2;
  std::size_t image_size = 32;
  std::size_t channels = 3;
  std::size_t patch_size = 4;
  int grid_size = 5;
  int spline_degree = 3;
  double spline_span = 1.5;
  double residual_weight = 0.2;
  std::size_t proj_dim = 256;
  std::size_t k_retrieve = 5;
  double norm_eps = 1e-5;

  std::size_t band_dim() const { return d_model / kBands; }
  std::size_t pixel_count() const { return image_size * image_size * channels; }

  // Throws a config error naming the offending field.
  void validate() const;
};

// Component toggles for ablation runs.
struct Ablation {
  bool disable_pixel_fft = false;
  bool disable_feature_fft = false;
  bool disable_retrieval = false;
  bool use_mlp_instead_of_kan = false;
};

}  // namespace spark::spectral
