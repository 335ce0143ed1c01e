#include "meshprox/rng.hpp"

#include <cassert>

namespace meshprox {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a_64(std::string_view bytes) {
  std::uint64_t h = kFnvOffset;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                          std::uint64_t index) {
  std::uint64_t h = fnv1a_64(stream);
  h = splitmix64(h ^ splitmix64(master));
  h = splitmix64(h ^ index);
  return h;
}

std::mt19937_64 make_stream(std::uint64_t master, std::string_view stream,
                            std::uint64_t index) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

double uniform_real(std::mt19937_64& gen, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(gen);
}

std::size_t uniform_index(std::mt19937_64& gen, std::size_t n) {
  assert(n > 0);
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(gen);
}

double exponential_gap(std::mt19937_64& gen, double mean) {
  assert(mean > 0.0);
  std::exponential_distribution<double> dist(1.0 / mean);
  return dist(gen);
}

}  // namespace meshprox
