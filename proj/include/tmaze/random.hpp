#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace tmaze {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive hash of a tuple of integers; used to derive independent
/// streams (master seed, generation, genotype index, trial index, ...).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

// Stream tags for derive_seed.
inline constexpr std::uint64_t kStreamInit = 0x696e6974;      // "init"
inline constexpr std::uint64_t kStreamBreed = 0x62726564;     // "bred"
inline constexpr std::uint64_t kStreamTrial = 0x7472616c;     // "tral"
inline constexpr std::uint64_t kStreamAblation = 0x61626c74;  // "ablt"
inline constexpr std::uint64_t kStreamStart = 0x73747274;     // "strt"
inline constexpr std::uint64_t kStreamDemo = 0x64656d6f;      // "demo"

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }

  template <typename T>
  void shuffle(std::span<T> values) {
    std::shuffle(values.begin(), values.end(), engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tmaze
