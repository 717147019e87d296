#include "mrsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mrsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace

std::uint64_t Rng::uniform_u64(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_u64: bound must be > 0");
  return next_u64() % bound;
}

double Rng::uniform_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_range(double lo, double hi) {
  return lo + (hi - lo) * uniform_double();
}

double Rng::exponential(double mean) {
  if (mean <= 0.0) throw std::invalid_argument("exponential: mean must be > 0");
  return -std::log(1.0 - uniform_double()) * mean;
}

std::uint64_t Rng::poisson(double mean) {
  if (mean < 0.0) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean > 30.0) {
    double half = mean / 2.0;
    return poisson(half) + poisson(mean - half);
  }
  // Knuth's product method; safe here because exp(-mean) stays well above
  // double underflow for mean <= 30.
  const double limit = std::exp(-mean);
  std::uint64_t k = 0;
  double product = uniform_double();
  while (product > limit) {
    ++k;
    product *= uniform_double();
  }
  return k;
}

std::uint64_t RngStream::derive_seed(std::uint64_t base, std::string_view name) {
  return splitmix64(base ^ fnv1a(name));
}

Rng& RngStream::stream(std::string_view name) {
  auto it = streams_.find(name);
  if (it == streams_.end()) {
    it = streams_.emplace(std::string(name), Rng(derive_seed(seed_, name))).first;
  }
  return it->second;
}

}  // namespace mrsim
