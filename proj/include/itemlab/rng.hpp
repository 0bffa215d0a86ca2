#pragma once

#include <cstdint>
#include <random>

#include "itemlab/stats.hpp"

namespace itemlab {

/// SplitMix64 step; used to derive stage and chain seeds from one master
/// seed so a whole pipeline run reproduces from a single number.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// FNV-1a over a string, for hashing stage names into the seed stream.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t stage_seed(std::uint64_t master, std::string_view stage) {
  return splitmix64(master ^ fnv1a64(stage));
}

inline std::uint64_t chain_seed(std::uint64_t stage, int chain) {
  return splitmix64(stage + static_cast<std::uint64_t>(chain) + 1);
}

/// mt19937_64 with explicitly-coded variate transforms. The standard
/// engine has a portable sequence; the standard distributions do not,
/// so all transforms here are written out to keep outputs reproducible
/// for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1); never returns exactly 0 or 1.
  double u01() {
    const std::uint64_t bits = engine_() >> 11;  // 53 random bits
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  double normal() { return stats::normal_quantile(u01()); }

  double normal(double mu, double sd) { return mu + sd * normal(); }

  double lognormal(double log_mu, double log_sd) {
    return std::exp(log_mu + log_sd * normal());
  }

  bool bernoulli(double p) { return u01() < p; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Multiply-shift rejection-free mapping; bias < 2^-64, irrelevant here.
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(engine_()) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(wide >> 64);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace itemlab
