#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spark/datagen/sample.hpp"
#include "spark/numkit/init.hpp"
#include "spark/numkit/params.hpp"
#include "spark/numkit/tape.hpp"
#include "spark/numkit/tensor.hpp"
#include "spark/spectral/config.hpp"

namespace spark::spectral {

using numkit::ParameterStore;
using numkit::RealVec;
using numkit::Rng;
using numkit::Tape;
using numkit::Var;

// Source of frozen semantic features for a sample. The semantic encoder
// stacks a trainable tail on top of whatever the provider returns.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // Registers any frozen parameters the provider owns.
  virtual void init(ParameterStore& store, Rng& rng) const = 0;
  virtual RealVec features(const ParameterStore& store, const Sample& sample) const = 0;
  virtual std::size_t frozen_parameter_count() const = 0;
};

// Frozen random projection of each patch, silu, then mean over patches.
class FrozenRandomPatchEncoder final : public EmbeddingProvider {
 public:
  explicit FrozenRandomPatchEncoder(const ModelConfig& config);

  void init(ParameterStore& store, Rng& rng) const override;
  RealVec features(const ParameterStore& store, const Sample& sample) const override;
  std::size_t frozen_parameter_count() const override { return d_model_ * patch_len_ + d_model_; }

  static constexpr const char* kWeightName = "semantic.trunk.w";
  static constexpr const char* kBiasName = "semantic.trunk.b";

 private:
  std::size_t d_model_;
  std::size_t image_size_;
  std::size_t channels_;
  std::size_t patch_;
  std::size_t patch_len_;
};

// Embeddings read from an SPKE file, looked up by sample id.
class PrecomputedLoader final : public EmbeddingProvider {
 public:
  PrecomputedLoader(const std::string& path, std::size_t d_model);

  void init(ParameterStore&, Rng&) const override {}
  RealVec features(const ParameterStore& store, const Sample& sample) const override;
  std::size_t frozen_parameter_count() const override { return 0; }

  std::size_t size() const { return table_.size(); }

 private:
  std::size_t d_model_;
  std::unordered_map<std::string, std::vector<float>> table_;
};

// features -> silu(A x + a) -> B (.) + b; A and B are trainable.
class SemanticEncoder {
 public:
  SemanticEncoder(const ModelConfig& config, std::shared_ptr<const EmbeddingProvider> provider);

  void init(ParameterStore& store, Rng& rng) const;
  Var forward(Tape& tape, ParameterStore& store, const Sample& sample) const;
  std::size_t trainable_parameter_count() const { return 2 * (d_model_ * d_model_ + d_model_); }
  std::size_t frozen_parameter_count() const { return provider_->frozen_parameter_count(); }

  const EmbeddingProvider& provider() const { return *provider_; }

 private:
  std::size_t d_model_;
  std::shared_ptr<const EmbeddingProvider> provider_;
};

// SPKE embedding file: magic "SPKE", u32 version, u32 d_model, u64 count,
// then per record u16 id length, UTF-8 id, d_model x f32.
struct EmbeddingFile {
  std::uint32_t d_model = 0;
  std::vector<std::pair<std::string, std::vector<float>>> records;
};

inline constexpr std::uint32_t kEmbeddingFileVersion = 1;

void write_embedding_file(const std::string& path, const EmbeddingFile& file);
EmbeddingFile read_embedding_file(const std::string& path);

}  // namespace spark::spectral
