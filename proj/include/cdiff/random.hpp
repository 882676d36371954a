#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace cdiff {

// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed for stream (base, ids...) - identical ids give identical streams.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids);

// Explicit random-stream handle. Every stochastic routine takes one of these,
// so chains and batch entries can be given split, reproducible streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed), seed_base_(seed) {}

  Rng split(std::initializer_list<std::uint64_t> ids) const;
  std::uint64_t seed() const { return seed_base_; }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  // Open interval (0, 1); safe for log().
  double uniform_open();
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double exponential() { return std::exponential_distribution<double>(1.0)(engine_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  long poisson(double mean);
  // Draw an index proportional to non-negative weights (need not be normalized).
  int categorical(std::span<const double> weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_base_ = 0;
};

}  // namespace cdiff
