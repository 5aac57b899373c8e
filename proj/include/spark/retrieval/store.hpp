#pragma once

#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

namespace spark::retrieval {

inline constexpr std::uint32_t kStoreVersion = 1;

struct SignatureRecord {
  std::uint64_t id = 0;
  std::vector<float> embedding;  // unit length
  int label = 0;                 // 0 real, 1 fake
  std::string generator_id;
  std::uint32_t phase = 0;
};

struct Neighbor {
  std::uint64_t id = 0;
  double similarity = 0.0;
  int label = 0;
  std::string generator_id;
};

struct Prediction {
  int label = 0;
  std::vector<Neighbor> neighbors;
};

// Exact cosine-similarity store. Records are only ever appended; readers
// share a lock, insert takes it exclusively.
class VectorStore {
 public:
  explicit VectorStore(std::uint32_t dim);
  VectorStore(VectorStore&& other) noexcept;
  VectorStore& operator=(VectorStore&& other) noexcept;

  std::uint64_t insert(std::span<const double> embedding, int label, const std::string& generator_id,
                       std::uint32_t phase);

  // min(k, size) neighbors, similarity descending, ties by ascending id.
  std::vector<Neighbor> topk(std::span<const double> query, std::size_t k) const;
  Prediction predict(std::span<const double> query, std::size_t k) const;

  std::uint32_t dim() const { return dim_; }
  std::size_t size() const;
  std::vector<SignatureRecord> records() const;

  // Full rewrite through a temporary file; a reader sees the old or the new file.
  void save(const std::string& path) const;
  static VectorStore load(const std::string& path);
  static VectorStore decode(const std::vector<std::uint8_t>& bytes);
  std::vector<std::uint8_t> encode() const;

 private:
  std::uint32_t dim_;
  std::vector<SignatureRecord> records_;
  std::unique_ptr<std::shared_mutex> mutex_;
};

// The unit-length f32 vector insert stores for an embedding.
std::vector<float> signature(std::span<const double> embedding, std::uint32_t dim);

// 0 (real) iff strictly more than half the labels are 0; a tie is fake.
int majority_vote(std::span<const int> labels);

}  // namespace spark::retrieval
