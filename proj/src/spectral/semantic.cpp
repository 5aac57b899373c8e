#include "spark/spectral/semantic.hpp"

#include <cmath>

#include "spark/error.hpp"
#include "spark/io/binary.hpp"
#include "spark/numkit/math.hpp"
#include "spark/numkit/ops.hpp"

namespace spark::spectral {

namespace ops = numkit::ops;

FrozenRandomPatchEncoder::FrozenRandomPatchEncoder(const ModelConfig& config)
    : d_model_(config.d_model),
      image_size_(config.image_size),
      channels_(config.channels),
      patch_(config.patch_size),
      patch_len_(config.patch_size * config.patch_size * config.channels) {}

void FrozenRandomPatchEncoder::init(ParameterStore& store, Rng& rng) const {
  auto& w = store.add(kWeightName, d_model_, patch_len_, /*trainable=*/false);
  numkit::fill_normal(w.value, 1.0 / std::sqrt(static_cast<double>(patch_len_)), rng);
  auto& b = store.add(kBiasName, d_model_, 1, /*trainable=*/false);
  numkit::fill_normal(b.value, 0.1, rng);
}

RealVec FrozenRandomPatchEncoder::features(const ParameterStore& store, const Sample& sample) const {
  if (!(sample.pixels.size() == image_size_ * image_size_ * channels_)) {
    fail(ErrorKind::kInvalidInput, "patch encoder: sample '" + sample.sample_id +
                                   "' has the wrong pixel count");
  }
  const auto& w = store.at(kWeightName).value;
  const auto& b = store.at(kBiasName).value;
  const std::size_t per_side = image_size_ / patch_;
  RealVec pooled(d_model_, 0.0);
  std::vector<double> patch(patch_len_);
  for (std::size_t py = 0; py < per_side; ++py) {
    for (std::size_t px = 0; px < per_side; ++px) {
      std::size_t k = 0;
      for (std::size_t y = 0; y < patch_; ++y) {
        for (std::size_t x = 0; x < patch_; ++x) {
          const std::size_t row = py * patch_ + y;
          const std::size_t col = px * patch_ + x;
          for (std::size_t c = 0; c < channels_; ++c) {
            patch[k++] = sample.pixels[(row * image_size_ + col) * channels_ + c] - 0.5;
          }
        }
      }
      for (std::size_t o = 0; o < d_model_; ++o) {
        const double* wo = w.data() + o * patch_len_;
        double acc = b[o];
        for (std::size_t i = 0; i < patch_len_; ++i) acc += wo[i] * patch[i];
        pooled[o] += numkit::silu(acc);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(per_side * per_side);
  for (double& v : pooled) v *= inv;
  return pooled;
}

PrecomputedLoader::PrecomputedLoader(const std::string& path, std::size_t d_model) : d_model_(d_model) {
  EmbeddingFile file = read_embedding_file(path);
  if (!(file.d_model == d_model)) {
    fail(ErrorKind::kConfig, "precomputed embeddings in '" + path + "' have d_model " +
                             std::to_string(file.d_model) + ", model expects " + std::to_string(d_model));
  }
  for (auto& [id, vec] : file.records) table_[id] = std::move(vec);
}

RealVec PrecomputedLoader::features(const ParameterStore&, const Sample& sample) const {
  auto it = table_.find(sample.sample_id);
  if (it == table_.end()) fail(ErrorKind::kNotFound, "no precomputed embedding for sample '" + sample.sample_id + "'");
  return RealVec(it->second.begin(), it->second.end());
}

SemanticEncoder::SemanticEncoder(const ModelConfig& config, std::shared_ptr<const EmbeddingProvider> provider)
    : d_model_(config.d_model), provider_(std::move(provider)) {
  require(provider_ != nullptr, ErrorKind::kConfig, "semantic encoder needs an embedding provider");
}

void SemanticEncoder::init(ParameterStore& store, Rng& rng) const {
  provider_->init(store, rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_model_));
  numkit::fill_normal(store.add("semantic.tail0.w", d_model_, d_model_).value, scale, rng);
  store.add("semantic.tail0.b", d_model_, 1);
  numkit::fill_normal(store.add("semantic.tail1.w", d_model_, d_model_).value, scale, rng);
  store.add("semantic.tail1.b", d_model_, 1);
}

Var SemanticEncoder::forward(Tape& tape, ParameterStore& store, const Sample& sample) const {
  const Var trunk = tape.constant(provider_->features(store, sample));
  const Var b0 = tape.parameter(store, "semantic.tail0.b");
  const Var hidden = ops::silu(ops::linear(trunk, tape.parameter(store, "semantic.tail0.w"), d_model_, &b0));
  const Var b1 = tape.parameter(store, "semantic.tail1.b");
  return ops::linear(hidden, tape.parameter(store, "semantic.tail1.w"), d_model_, &b1);
}

void write_embedding_file(const std::string& path, const EmbeddingFile& file) {
  io::ByteWriter w;
  w.put_bytes("SPKE");
  w.put(kEmbeddingFileVersion);
  w.put(file.d_model);
  w.put(static_cast<std::uint64_t>(file.records.size()));
  for (const auto& [id, vec] : file.records) {
    if (!(vec.size() == file.d_model)) {
      fail(ErrorKind::kInvalidInput, "embedding for '" + id + "' has length " + std::to_string(vec.size()));
    }
    w.put_string16(id);
    for (float v : vec) w.put(v);
  }
  io::write_file_atomic(path, w.bytes());
}

EmbeddingFile read_embedding_file(const std::string& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes.data(), bytes.size());
  if (r.get_bytes(4, "magic") != "SPKE") throw CorruptStoreError("'" + path + "' is not an SPKE file", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kEmbeddingFileVersion) {
    throw CorruptStoreError("unsupported SPKE version " + std::to_string(version), 4);
  }
  EmbeddingFile file;
  file.d_model = r.get<std::uint32_t>("d_model");
  const auto count = r.get<std::uint64_t>("count");
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = r.get_string16("record id");
    std::vector<float> vec(file.d_model);
    for (auto& v : vec) v = r.get<float>("embedding");
    file.records.emplace_back(std::move(id), std::move(vec));
  }
  if (r.remaining() != 0) throw CorruptStoreError("trailing bytes after SPKE records", r.position());
  return file;
}

}  // namespace spark::spectral
