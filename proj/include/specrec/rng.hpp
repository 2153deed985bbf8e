// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_RNG_HPP
#define SPECREC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace specrec {

// Counter-based deterministic RNG. Every consumer derives its own stream
// from (seed, tag, indices...) so results are independent of evaluation
// order and safe to parallelize. Same seed, same machine => same bits.

constexpr std::uint64_t kStreamLosMask = 0x6c6f736d61736bULL;     // "losmask"
constexpr std::uint64_t kStreamShadow = 0x736861646f77ULL;        // "shadow"
constexpr std::uint64_t kStreamAttackMask = 0x61746d61736bULL;    // "atmask"
constexpr std::uint64_t kStreamJammerPos = 0x6a616d706f73ULL;     // "jampos"
constexpr std::uint64_t kStreamJammerLos = 0x6a616d6c6f73ULL;     // "jamlos"
constexpr std::uint64_t kStreamJammerShadow = 0x6a616d736866ULL;  // "jamshf"
constexpr std::uint64_t kStreamCorpus = 0x636f72707573ULL;        // "corpus"
constexpr std::uint64_t kStreamDiffusion = 0x64696666ULL;         // "diff"
constexpr std::uint64_t kStreamGuide = 0x6775696465ULL;           // "guide"
constexpr std::uint64_t kStreamReverse = 0x726576ULL;             // "rev"
constexpr std::uint64_t kStreamTrain = 0x747261696eULL;           // "train"
constexpr std::uint64_t kStreamInit = 0x696e6974ULL;              // "init"
constexpr std::uint64_t kStreamEval = 0x6576616cULL;              // "eval"

inline std::uint64_t split_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  return split_mix(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

template <typename... Rest>
inline std::uint64_t mix(std::uint64_t a, std::uint64_t b, Rest... rest) {
  return mix(mix(a, b), static_cast<std::uint64_t>(rest)...);
}

class Rng {
 public:
  explicit Rng(std::uint64_t stream_key) : state_(split_mix(stream_key)) {}

  template <typename... Keys>
  explicit Rng(std::uint64_t seed, Keys... keys) : Rng(mix(seed, static_cast<std::uint64_t>(keys)...)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in (0,1); never returns exactly 0 (log-safe)
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; generates pairs, second value cached within this stream
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace specrec

#endif  // SPECREC_RNG_HPP
