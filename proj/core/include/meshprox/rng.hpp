#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace meshprox {

// FNV-1a over raw bytes; also the basis for stream-name seed derivation.
std::uint64_t fnv1a_64(std::string_view bytes);

// Stable 64-bit seed for a named substream of one master seed. Every consumer
// of randomness names its own stream so that adding or reordering consumers
// never perturbs the draws seen by another (e.g. proxy probing noise must not
// shift client coordinate noise).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index = 0);

std::mt19937_64 make_stream(std::uint64_t master, std::string_view stream,
                            std::uint64_t index = 0);

double uniform_real(std::mt19937_64& gen, double lo, double hi);

// Uniform draw from [0, n); n must be positive.
std::size_t uniform_index(std::mt19937_64& gen, std::size_t n);

// Exponential inter-arrival gap with the given mean (> 0).
double exponential_gap(std::mt19937_64& gen, double mean);

}  // namespace meshprox
