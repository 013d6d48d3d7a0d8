#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace geore {

// FNV-1a over the stream name, folded into the master seed. Every consumer
// (init, shuffle, negative sampling, ...) draws from its own named stream so
// adding a consumer never perturbs the others.
inline std::uint64_t stream_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= master + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

inline std::mt19937_64 rng_stream(std::uint64_t master, std::string_view name) {
  return std::mt19937_64(stream_seed(master, name));
}

}  // namespace geore
