#include "spark/fusion/fusion.hpp"

#include <cmath>

#include "spark/error.hpp"
#include "spark/numkit/ops.hpp"

namespace spark::fusion {

namespace ops = numkit::ops;

CrossAttention::CrossAttention(std::string prefix, const spectral::ModelConfig& config)
    : prefix_(std::move(prefix)), d_model_(config.d_model), band_dim_(config.band_dim()), heads_(config.n_heads) {}

std::vector<std::string> CrossAttention::parameter_names() const {
  std::vector<std::string> names;
  for (const char* proj : {"q", "k", "v", "o"}) {
    names.push_back(name(proj, "w"));
    names.push_back(name(proj, "b"));
  }
  return names;
}

void CrossAttention::init(ParameterStore& store, Rng& rng) const {
  const double scale = 1.0 / std::sqrt(static_cast<double>(band_dim_));
  for (const char* proj : {"q", "k", "v", "o"}) {
    numkit::fill_normal(store.add(name(proj, "w"), band_dim_, band_dim_).value, scale, rng);
    store.add(name(proj, "b"), band_dim_, 1);
  }
}

Var CrossAttention::forward(Tape& tape, ParameterStore& store, Var z1, Var z2) const {
  if (!(z1.size() == d_model_ && z2.size() == d_model_)) {
    fail(ErrorKind::kInvalidInput, "cross_attention: both embeddings must have length " +
                                   std::to_string(d_model_));
  }
  constexpr std::size_t tokens = spectral::kBands;
  const auto project = [&](const char* proj, Var x) {
    const Var b = tape.parameter(store, name(proj, "b"));
    return ops::linear(x, tape.parameter(store, name(proj, "w")), band_dim_, &b, tokens);
  };
  const Var q = project("q", z1);
  const Var k = project("k", z2);
  const Var v = project("v", z2);
  const Var attended = ops::attention(q, k, v, tokens, heads_);
  return ops::add(project("o", attended), z1);
}

RealVec CrossAttention::weights(ParameterStore& store, std::span<const double> z1, std::span<const double> z2,
                                std::size_t head) const {
  Tape tape(false);
  constexpr std::size_t tokens = spectral::kBands;
  const auto project = [&](const char* proj, std::span<const double> x) {
    const Var b = tape.parameter(store, name(proj, "b"));
    return ops::linear(tape.constant(RealVec(x.begin(), x.end())), tape.parameter(store, name(proj, "w")),
                       band_dim_, &b, tokens);
  };
  const Var q = project("q", z1);
  const Var k = project("k", z2);
  return ops::attention_weights(q.value(), k.value(), tokens, heads_, head);
}

Var fuse(Var h_cross, Var z1, Var z2, double residual_weight) {
  require(h_cross.size() == z1.size() && z1.size() == z2.size(), ErrorKind::kInvalidInput,
          "fuse: length mismatch");
  return ops::add(ops::add(h_cross, ops::scale(z1, residual_weight)), ops::scale(z2, residual_weight));
}

RealVec fuse(std::span<const double> h_cross, std::span<const double> z1, std::span<const double> z2,
             double residual_weight) {
  require(h_cross.size() == z1.size() && z1.size() == z2.size(), ErrorKind::kInvalidInput,
          "fuse: length mismatch");
  RealVec out(h_cross.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (h_cross[i] + residual_weight * z1[i]) + residual_weight * z2[i];
  }
  return out;
}

FusionHead::FusionHead(std::string prefix, const spectral::ModelConfig& config)
    : prefix_(std::move(prefix)), d_model_(config.d_model), proj_dim_(config.proj_dim) {}

std::vector<std::string> FusionHead::parameter_names() const {
  return {prefix_ + ".proj.w", prefix_ + ".proj.b", prefix_ + ".cls.w", prefix_ + ".cls.b"};
}

void FusionHead::init(ParameterStore& store, Rng& rng) const {
  numkit::fill_normal(store.add(prefix_ + ".proj.w", proj_dim_, d_model_).value,
                      1.0 / std::sqrt(static_cast<double>(d_model_)), rng);
  store.add(prefix_ + ".proj.b", proj_dim_, 1);
  numkit::fill_normal(store.add(prefix_ + ".cls.w", 1, proj_dim_).value,
                      1.0 / std::sqrt(static_cast<double>(proj_dim_)), rng);
  store.add(prefix_ + ".cls.b", 1, 1);
}

Var FusionHead::forward(Tape& tape, ParameterStore& store, Var h_fused) const {
  if (!(h_fused.size() == d_model_)) {
    fail(ErrorKind::kInvalidInput, "classify: expected embedding of length " + std::to_string(d_model_));
  }
  const Var pb = tape.parameter(store, prefix_ + ".proj.b");
  const Var hidden = ops::silu(ops::linear(h_fused, tape.parameter(store, prefix_ + ".proj.w"), proj_dim_, &pb));
  const Var cb = tape.parameter(store, prefix_ + ".cls.b");
  return ops::linear(hidden, tape.parameter(store, prefix_ + ".cls.w"), 1, &cb);
}

}  // namespace spark::fusion
