#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>

namespace mrsim {

// Deterministic random source. All sampling goes through our own mappings so
// that a given seed produces the same draws on every platform (std distribution
// objects are not bit-stable across standard libraries).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_u64(std::uint64_t bound);

  // Uniform double in [0, 1).
  double uniform_double();

  // Uniform double in [lo, hi).
  double uniform_range(double lo, double hi);

  double exponential(double mean);

  // Exact Poisson sampling; large means are split recursively
  // (sum of independent Poissons is Poisson).
  std::uint64_t poisson(double mean);

 private:
  std::mt19937_64 gen_;
};

// A keyed family of independent streams derived from one base seed. Streams
// are created on first use; adding a new consumer never perturbs the draws
// seen by existing ones.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  Rng& stream(std::string_view name);

  static std::uint64_t derive_seed(std::uint64_t base, std::string_view name);

 private:
  std::uint64_t seed_;
  std::map<std::string, Rng, std::less<>> streams_;
};

}  // namespace mrsim
