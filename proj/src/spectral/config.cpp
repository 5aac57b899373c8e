#include "spark/spectral/config.hpp"

#include <string>

#include "spark/error.hpp"

namespace spark::spectral {

void ModelConfig::validate() const {
  const auto check = [](bool ok, const std::string& msg) { require(ok, ErrorKind::kConfig, msg); };
  check(d_model >= 4 && d_model % kBands == 0, "model.d_model: must be a positive multiple of 4, got " +
                                                   std::to_string(d_model));
  check(n_heads >= 1 && band_dim() % n_heads == 0,
        "model.n_heads: band_dim " + std::to_string(band_dim()) + " is not divisible by " + std::to_string(n_heads));
  check(n_experts >= 1, "model.n_experts: must be >= 1");
  check(blocks_per_path >= 1, "model.blocks_per_path: must be >= 1");
  check(image_size >= 4, "model.image_size: must be >= 4, got " + std::to_string(image_size));
  check(channels == 1 || channels == 3, "model.channels: must be 1 or 3");
  check(patch_size >= 1 && image_size % patch_size == 0, "model.patch_size: must divide model.image_size");
  check(grid_size >= 1, "model.grid_size: must be >= 1");
  check(spline_degree >= 1 && spline_degree <= 7, "model.spline_degree: must be in [1, 7]");
  check(spline_span > 0.0, "model.spline_span: must be positive");
  check(residual_weight >= 0.0, "model.residual_weight: must be >= 0");
  check(proj_dim >= 1, "model.proj_dim: must be >= 1");
  check(k_retrieve >= 1, "model.k_retrieve: must be >= 1");
  check(norm_eps > 0.0, "model.norm_eps: must be positive");
}

}  // namespace spark::spectral
