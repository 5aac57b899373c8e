#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace spark::numkit {

using Rng = std::mt19937_64;

void fill_normal(std::span<double> out, double stddev, Rng& rng);
void fill_uniform(std::span<double> out, double lo, double hi, Rng& rng);

// Derives an independent stream from a base seed and a tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace spark::numkit
