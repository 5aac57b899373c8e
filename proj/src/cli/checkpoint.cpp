#include "spark/cli/checkpoint.hpp"

#include "spark/error.hpp"
#include "spark/io/binary.hpp"

namespace spark::cli {

std::vector<std::uint8_t> encode_checkpoint(const std::string& config_text, const numkit::ParameterStore& params) {
  io::ByteWriter w;
  w.put_bytes("SPKM");
  w.put(kCheckpointVersion);
  w.put(static_cast<std::uint32_t>(config_text.size()));
  w.put_bytes(config_text);
  w.put(static_cast<std::uint32_t>(params.entry_count()));
  for (const auto& [name, e] : params) {
    w.put_string16(name);
    // Column vectors are rank 1.
    if (e.cols == 1) {
      w.put(std::uint8_t{1});
      w.put(static_cast<std::uint32_t>(e.rows));
    } else {
      w.put(std::uint8_t{2});
      w.put(static_cast<std::uint32_t>(e.rows));
      w.put(static_cast<std::uint32_t>(e.cols));
    }
    for (double v : e.value) w.put(v);
  }
  w.put(io::crc32(w.bytes().data(), w.bytes().size()));
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes.data(), bytes.size());
  if (r.get_bytes(4, "magic") != "SPKM") throw CorruptStoreError("not an SPKM checkpoint", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw CorruptStoreError("unsupported checkpoint version " + std::to_string(version), 4);
  }
  Checkpoint ck;
  ck.config_text = r.get_bytes(r.get<std::uint32_t>("config length"), "config text");
  const auto count = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = r.position();
    std::string name = r.get_string16("tensor name");
    const auto rank = r.get<std::uint8_t>("tensor rank");
    if (rank != 1 && rank != 2) throw CorruptStoreError("tensor '" + name + "' has rank " + std::to_string(rank), at);
    const std::size_t rows = r.get<std::uint32_t>("tensor dims");
    const std::size_t cols = rank == 2 ? r.get<std::uint32_t>("tensor dims") : 1;
    if (name.empty() || rows == 0 || cols == 0) throw CorruptStoreError("tensor with an empty name or shape", at);
    if (ck.params.contains(name)) throw CorruptStoreError("duplicate tensor '" + name + "'", at);
    // Guards the allocation below against a corrupted size.
    if (rows * cols > r.remaining() / sizeof(double)) {
      throw CorruptStoreError("truncated file while reading tensor data", r.position());
    }
    auto& e = ck.params.add(std::move(name), rows, cols);
    for (double& v : e.value) v = r.get<double>("tensor data");
  }
  const std::size_t payload = r.position();
  const auto stored = r.get<std::uint32_t>("checksum");
  if (stored != io::crc32(bytes.data(), payload)) throw CorruptStoreError("checkpoint checksum mismatch", payload);
  if (r.remaining() != 0) throw CorruptStoreError("trailing bytes after checksum", r.position());
  return ck;
}

void save_checkpoint(const std::string& path, const std::string& config_text, const numkit::ParameterStore& params) {
  io::write_file_atomic(path, encode_checkpoint(config_text, params));
}

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return decode_checkpoint(io::read_file(path));
  } catch (const CorruptStoreError& e) {
    throw CorruptStoreError("'" + path + "': " + e.detail(), e.offset());
  }
}

void restore_parameters(numkit::ParameterStore& target, const numkit::ParameterStore& saved, const std::string& path) {
  try {
    target.check_compatible(saved);
  } catch (const Error& e) {
    fail(ErrorKind::kConfig, "checkpoint '" + path + "' does not match the model config: " + e.what());
  }
  for (auto& [name, e] : target) e.value = saved.at(name).value;
}

}  // namespace spark::cli
