#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace contam {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Per-trial seed: master_seed XOR splitmix of the trial index.
inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  return master ^ splitmix64(trial + 1);
}

/// Per-stage stream within a trial, derived by a further stage counter so
/// every pipeline stage draws from an independent stream.
inline std::uint64_t stage_seed(std::uint64_t trial_seed_value, std::uint64_t stage) {
  return splitmix64(trial_seed_value + 0x632BE59BD9B4E019ULL * (stage + 1));
}

/// Deterministic random stream. Uses mt19937_64 with explicitly coded
/// uniform/normal transforms so output is bit-stable across platforms
/// (std::normal_distribution is implementation-defined).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t bits() { return gen_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Standard normal via the polar (Marsaglia) method.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection-free modulo bias is negligible for n << 2^64, but we reject
    // anyway to keep the stream reproducibly unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace contam
