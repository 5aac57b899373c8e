#include "spark/retrieval/store.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "spark/error.hpp"
#include "spark/io/binary.hpp"

namespace spark::retrieval {

namespace {

std::vector<double> normalized(std::span<const double> v, std::uint32_t dim, const char* what) {
  if (v.size() != dim) {
    fail(ErrorKind::kInvalidInput, std::string(what) + ": length " + std::to_string(v.size()) +
                                       " does not match store dim " + std::to_string(dim));
  }
  double sq = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) fail(ErrorKind::kInvalidInput, std::string(what) + ": non-finite component");
    sq += x * x;
  }
  if (!(sq > 0.0)) fail(ErrorKind::kInvalidInput, std::string(what) + ": zero vector");
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * inv;
  return out;
}

}  // namespace

VectorStore::VectorStore(std::uint32_t dim) : dim_(dim), mutex_(std::make_unique<std::shared_mutex>()) {
  require(dim > 0, ErrorKind::kConfig, "vector store dim must be positive");
}

VectorStore::VectorStore(VectorStore&& other) noexcept
    : dim_(other.dim_), records_(std::move(other.records_)), mutex_(std::move(other.mutex_)) {}

VectorStore& VectorStore::operator=(VectorStore&& other) noexcept {
  dim_ = other.dim_;
  records_ = std::move(other.records_);
  mutex_ = std::move(other.mutex_);
  return *this;
}

std::uint64_t VectorStore::insert(std::span<const double> embedding, int label, const std::string& generator_id,
                                  std::uint32_t phase) {
  require(label == 0 || label == 1, ErrorKind::kInvalidInput, "insert: label must be 0 or 1");
  require(generator_id.size() <= 0xFFFF, ErrorKind::kInvalidInput, "insert: generator id too long");
  SignatureRecord rec;
  rec.embedding = signature(embedding, dim_);
  rec.label = label;
  rec.generator_id = generator_id;
  rec.phase = phase;
  std::unique_lock lock(*mutex_);
  rec.id = records_.empty() ? 0 : records_.back().id + 1;
  records_.push_back(std::move(rec));
  return records_.back().id;
}

std::vector<Neighbor> VectorStore::topk(std::span<const double> query, std::size_t k) const {
  require(k >= 1, ErrorKind::kInvalidInput, "topk: k must be at least 1");
  const std::vector<double> q = normalized(query, dim_, "topk");
  std::shared_lock lock(*mutex_);
  if (records_.empty()) fail(ErrorKind::kEmptyStore, "vector store is empty; index samples first");

  std::vector<std::pair<double, std::size_t>> scored(records_.size());
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const float* e = records_[r].embedding.data();
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += q[i] * static_cast<double>(e[i]);
    scored[r] = {s, r};
  }
  // Records are in id order, so the index breaks ties by id.
  const auto better = [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); };
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), better);

  std::vector<Neighbor> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const SignatureRecord& rec = records_[scored[i].second];
    out[i] = {rec.id, std::clamp(scored[i].first, -1.0, 1.0), rec.label, rec.generator_id};
  }
  return out;
}

Prediction VectorStore::predict(std::span<const double> query, std::size_t k) const {
  Prediction p;
  p.neighbors = topk(query, k);
  std::vector<int> labels;
  labels.reserve(p.neighbors.size());
  for (const auto& n : p.neighbors) labels.push_back(n.label);
  p.label = majority_vote(labels);
  return p;
}

std::size_t VectorStore::size() const {
  std::shared_lock lock(*mutex_);
  return records_.size();
}

std::vector<SignatureRecord> VectorStore::records() const {
  std::shared_lock lock(*mutex_);
  return records_;
}

std::vector<float> signature(std::span<const double> embedding, std::uint32_t dim) {
  const std::vector<double> unit = normalized(embedding, dim, "insert");
  return std::vector<float>(unit.begin(), unit.end());
}

int majority_vote(std::span<const int> labels) {
  require(!labels.empty(), ErrorKind::kInvalidInput, "majority_vote: no labels");
  std::size_t real = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, ErrorKind::kInvalidInput, "majority_vote: label must be 0 or 1");
    real += l == 0;
  }
  return 2 * real > labels.size() ? 0 : 1;
}

std::vector<std::uint8_t> VectorStore::encode() const {
  std::shared_lock lock(*mutex_);
  io::ByteWriter w;
  w.put_bytes("SPKV");
  w.put(kStoreVersion);
  w.put(dim_);
  w.put(static_cast<std::uint64_t>(records_.size()));
  for (const auto& rec : records_) {
    w.put(rec.id);
    w.put(static_cast<std::uint8_t>(rec.label));
    w.put(rec.phase);
    w.put_string16(rec.generator_id);
    for (float v : rec.embedding) w.put(v);
  }
  w.put(io::crc32(w.bytes().data(), w.bytes().size()));
  return std::move(w.bytes());
}

VectorStore VectorStore::decode(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes.data(), bytes.size());
  if (r.get_bytes(4, "magic") != "SPKV") throw CorruptStoreError("not an SPKV store", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kStoreVersion) throw CorruptStoreError("unsupported store version " + std::to_string(version), 4);
  const auto dim = r.get<std::uint32_t>("dim");
  if (dim == 0) throw CorruptStoreError("store dim is zero", 8);
  const auto count = r.get<std::uint64_t>("count");

  // Build into a local and only hand it out once the checksum matches.
  VectorStore store(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::size_t at = r.position();
    SignatureRecord rec;
    rec.id = r.get<std::uint64_t>("record id");
    const auto label = r.get<std::uint8_t>("label");
    if (label > 1) throw CorruptStoreError("label " + std::to_string(label) + " out of range", at + 8);
    rec.label = label;
    rec.phase = r.get<std::uint32_t>("phase");
    rec.generator_id = r.get_string16("generator id");
    rec.embedding.resize(dim);
    for (float& v : rec.embedding) v = r.get<float>("embedding");
    if (!store.records_.empty() && rec.id <= store.records_.back().id) {
      throw CorruptStoreError("record ids are not strictly increasing", at);
    }
    store.records_.push_back(std::move(rec));
  }
  const std::size_t payload = r.position();
  const auto stored = r.get<std::uint32_t>("checksum");
  if (stored != io::crc32(bytes.data(), payload)) throw CorruptStoreError("store checksum mismatch", payload);
  if (r.remaining() != 0) throw CorruptStoreError("trailing bytes after checksum", r.position());
  return store;
}

void VectorStore::save(const std::string& path) const { io::write_file_atomic(path, encode()); }

VectorStore VectorStore::load(const std::string& path) {
  try {
    return decode(io::read_file(path));
  } catch (const CorruptStoreError& e) {
    throw CorruptStoreError("'" + path + "': " + e.detail(), e.offset());
  }
}

}  // namespace spark::retrieval
