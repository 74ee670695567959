#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace hqa {

// splitmix64 finalizer, used to decorrelate derived seeds.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Labeled seed derivation: one run-level seed fans out into independent
// streams keyed by strings (purpose, frame id, question id). Streams are
// order-independent, so concurrent workers see identical randomness.
uint64_t derive_seed(uint64_t seed, std::initializer_list<std::string_view> labels);

std::mt19937_64 derived_stream(uint64_t seed, std::initializer_list<std::string_view> labels);

}  // namespace hqa
