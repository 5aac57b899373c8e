#include "spark/spectral/spectral.hpp"

#include <cmath>

#include "spark/error.hpp"
#include "spark/numkit/ops.hpp"

namespace spark::spectral {

namespace ops = numkit::ops;

std::array<RealVec, kBands> band_partition(std::span<const double> h_freq) {
  if (!(!h_freq.empty() && h_freq.size() % kBands == 0)) {
    fail(ErrorKind::kConfig, "band_partition: length " + std::to_string(h_freq.size()) +
                             " is not divisible by 4");
  }
  const std::size_t width = h_freq.size() / kBands;
  std::array<RealVec, kBands> bands;
  for (std::size_t b = 0; b < kBands; ++b) {
    bands[b].assign(h_freq.begin() + b * width, h_freq.begin() + (b + 1) * width);
  }
  return bands;
}

MultiBandBlock::MultiBandBlock(std::string prefix, const ModelConfig& config, bool use_mlp)
    : d_model_(config.d_model),
      eps_(config.norm_eps),
      proj_w_(prefix + ".proj.w"),
      proj_b_(prefix + ".proj.b"),
      norm_gain_(prefix + ".norm.gain"),
      norm_bias_(prefix + ".norm.bias") {
  const kan::SplineGrid grid = kan::make_spline_grid(config.grid_size, config.spline_degree, config.spline_span);
  for (std::size_t b = 0; b < kBands; ++b) {
    const std::string band_prefix = prefix + ".band" + std::to_string(b);
    if (use_mlp) {
      bands_.push_back(std::make_unique<kan::DenseBandLayer>(band_prefix, config.band_dim()));
    } else {
      bands_.push_back(std::make_unique<kan::KanBandLayer>(band_prefix, config.band_dim(), config.n_experts, grid));
    }
  }
}

void MultiBandBlock::init(ParameterStore& store, Rng& rng) const {
  for (const auto& band : bands_) band->init(store, rng);
  auto& w = store.add(proj_w_, d_model_, d_model_);
  numkit::fill_normal(w.value, 1.0 / std::sqrt(static_cast<double>(d_model_)), rng);
  store.add(proj_b_, d_model_, 1);
  auto& gain = store.add(norm_gain_, d_model_, 1);
  std::fill(gain.value.begin(), gain.value.end(), 1.0);
  store.add(norm_bias_, d_model_, 1);
}

Var MultiBandBlock::forward(Tape& tape, ParameterStore& store, Var h) const {
  if (!(h.size() == d_model_)) {
    fail(ErrorKind::kInvalidInput, "multiband block: expected input of length " + std::to_string(d_model_) +
                                   ", got " + std::to_string(h.size()));
  }
  const Var spectrum = ops::log_magnitude(h);
  const std::size_t width = d_model_ / kBands;
  std::vector<Var> outputs;
  outputs.reserve(kBands);
  for (std::size_t b = 0; b < kBands; ++b) {
    outputs.push_back(bands_[b]->forward(tape, store, ops::slice(spectrum, b * width, width)));
  }
  const Var bias = tape.parameter(store, proj_b_);
  const Var projected = ops::linear(ops::concat(outputs), tape.parameter(store, proj_w_), d_model_, &bias);
  return ops::layer_norm(projected, tape.parameter(store, norm_gain_), tape.parameter(store, norm_bias_), eps_);
}

std::size_t MultiBandBlock::parameter_count() const {
  std::size_t n = d_model_ * d_model_ + 3 * d_model_;
  for (const auto& band : bands_) n += band->parameter_count();
  return n;
}

SpectralPath::SpectralPath(std::string prefix, const ModelConfig& config, bool use_mlp)
    : d_model_(config.d_model), eps_(config.norm_eps) {
  for (std::size_t i = 0; i < config.blocks_per_path; ++i) {
    blocks_.emplace_back(prefix + ".block" + std::to_string(i), config, use_mlp);
    if (i + 1 < config.blocks_per_path) {
      norm_gain_.push_back(prefix + ".inorm" + std::to_string(i) + ".gain");
      norm_bias_.push_back(prefix + ".inorm" + std::to_string(i) + ".bias");
    }
  }
}

void SpectralPath::init(ParameterStore& store, Rng& rng) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    blocks_[i].init(store, rng);
    if (i < norm_gain_.size()) {
      auto& gain = store.add(norm_gain_[i], d_model_, 1);
      std::fill(gain.value.begin(), gain.value.end(), 1.0);
      store.add(norm_bias_[i], d_model_, 1);
    }
  }
}

Var SpectralPath::forward(Tape& tape, ParameterStore& store, Var h) const {
  Var x = h;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    x = blocks_[i].forward(tape, store, x);
    if (i < norm_gain_.size()) {
      x = ops::layer_norm(x, tape.parameter(store, norm_gain_[i]), tape.parameter(store, norm_bias_[i]), eps_);
    }
  }
  return x;
}

std::size_t SpectralPath::parameter_count() const {
  std::size_t n = 2 * d_model_ * norm_gain_.size();
  for (const auto& b : blocks_) n += b.parameter_count();
  return n;
}

PixelPath::PixelPath(std::string prefix, const ModelConfig& config)
    : d_model_(config.d_model), pixel_count_(config.pixel_count()), weight_(prefix + ".w"), bias_(prefix + ".b") {}

void PixelPath::init(ParameterStore& store, Rng& rng) const {
  auto& w = store.add(weight_, d_model_, pixel_count_);
  numkit::fill_normal(w.value, 1.0 / std::sqrt(static_cast<double>(pixel_count_)), rng);
  store.add(bias_, d_model_, 1);
}

Var PixelPath::forward(Tape& tape, ParameterStore& store, std::span<const double> pixels) const {
  if (!(pixels.size() == pixel_count_)) {
    fail(ErrorKind::kInvalidInput, "pixel path: expected " + std::to_string(pixel_count_) +
                                   " pixel values, got " + std::to_string(pixels.size()));
  }
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (!(pixels[i] >= 0.0 && pixels[i] <= 1.0)) {
      fail(ErrorKind::kInvalidInput, "pixel path: value " + std::to_string(pixels[i]) + " at index " +
                                         std::to_string(i) + " is outside [0, 1]");
    }
  }
  const Var x = tape.constant(std::vector<double>(pixels.begin(), pixels.end()));
  const Var b = tape.parameter(store, bias_);
  return ops::linear(x, tape.parameter(store, weight_), d_model_, &b);
}

}  // namespace spark::spectral
