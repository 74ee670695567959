#include "hqa/rng.hpp"

namespace hqa {

namespace {

// FNV-1a over a label, folded into the running seed.
uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

uint64_t derive_seed(uint64_t seed, std::initializer_list<std::string_view> labels) {
  uint64_t h = mix64(seed);
  for (std::string_view label : labels) {
    h = mix64(h ^ fnv1a(label));
  }
  return h;
}

std::mt19937_64 derived_stream(uint64_t seed, std::initializer_list<std::string_view> labels) {
  return std::mt19937_64(derive_seed(seed, labels));
}

}  // namespace hqa
