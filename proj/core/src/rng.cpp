#include "sccp/rng.hpp"

#include <cmath>

namespace sccp {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ull;

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t run) {
  key_ = mix64(mix64(seed + kGolden) + run * 0xD1342543DE82EF95ull + 1);
}

uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() {
  // 53 significant bits, shifted into (0,1) strictly.
  const uint64_t z = next_u64() >> 11;
  return (static_cast<double>(z) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential(double rate) { return -std::log(uniform()) / rate; }

}  // namespace sccp
