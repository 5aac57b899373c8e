#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spark/numkit/params.hpp"

namespace spark::cli {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// SPKM checkpoint: magic "SPKM", u32 version, u32 config length, config
// text, u32 tensor count, then per tensor u16 name length, name, u8 rank,
// u32 dims, f64 data; a trailing CRC32 covers every preceding byte.
struct Checkpoint {
  std::string config_text;
  numkit::ParameterStore params;  // every entry marked trainable
};

std::vector<std::uint8_t> encode_checkpoint(const std::string& config_text, const numkit::ParameterStore& params);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const std::string& config_text, const numkit::ParameterStore& params);
Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint values into a freshly built store, which keeps its
// own trainable flags. Names and shapes must match exactly.
void restore_parameters(numkit::ParameterStore& target, const numkit::ParameterStore& saved, const std::string& path);

}  // namespace spark::cli
