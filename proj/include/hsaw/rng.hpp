#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "hsaw/error.hpp"

namespace hsaw {

/// SplitMix64 finalizer; used only to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of substream `index` under master seed `seed`. Distinct (seed, index)
/// pairs give statistically independent mt19937_64 streams.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(seed, a), b);
}

/// Explicitly seeded 64-bit Mersenne Twister with a Gaussian helper. The full
/// state (engine + cached normal deviate) serializes to text so chains can be
/// checkpointed and resumed bit-exactly.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }
  double normal() { return normal_(engine_); }
  bool coin() { return (engine_() >> 63) != 0; }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_ << ' ' << normal_;
    return os.str();
  }

  static Rng deserialize(const std::string& text) {
    Rng rng(0);
    std::istringstream is(text);
    is >> rng.engine_ >> rng.normal_;
    if (!is) throw UsageError("malformed RNG state");
    return rng;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace hsaw
