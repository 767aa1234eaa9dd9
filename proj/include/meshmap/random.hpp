#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace meshmap {

// Seeded random stream. All stochastic operators take one of these by
// reference; parallel work derives independent child streams with derive().
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Child seed for stream `index` of `seed` (splitmix64 finalizer).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    for (auto p : path) seed = derive(seed, p);
    return seed;
  }

  // Uniform integer in [lo, hi].
  template <typename Int>
  Int uniform_int(Int lo, Int hi) {
    return std::uniform_int_distribution<Int>(lo, hi)(engine_);
  }

  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }

  // Fisher-Yates over the span, drawing through uniform_int.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = uniform_int<std::size_t>(0, i - 1);
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace meshmap
