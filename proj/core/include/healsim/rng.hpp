#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace healsim {

// The simulator owns its random number generation end to end. Nothing here
// depends on std:: distributions, whose output is implementation-defined;
// every seeded run must replay bit for bit on any platform.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a child seed from a root seed and an ordered list of tags.
/// Used to give every (repetition, cycle, node, purpose) its own stream.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = root;
  for (std::uint64_t t : tags) {
    s ^= splitmix64_next(s) + t;
    (void)splitmix64_next(s);
  }
  std::uint64_t out = s;
  return splitmix64_next(out);
}

/// xoshiro256** seeded via splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound), bound >= 1. Unbiased (Lemire).
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = (~bound + 1) % bound;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next_u64()) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the paired value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct elements drawn uniformly from pool, in draw order.
  template <typename T>
  std::vector<T> sample_without_replacement(std::vector<T> pool, std::size_t k) {
    if (k > pool.size()) k = pool.size();
    std::vector<T> out;
    out.reserve(k);
    std::size_t remaining = pool.size();
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = static_cast<std::size_t>(below(remaining));
      out.push_back(pool[j]);
      pool[j] = pool[--remaining];
    }
    return out;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Fixed tags for seed derivation. Values are arbitrary but frozen: changing
// them changes every seeded trajectory.
namespace seed_tag {
inline constexpr std::uint64_t kRepetition = 0x01;
inline constexpr std::uint64_t kTopology = 0x02;
inline constexpr std::uint64_t kInitModel = 0x03;
inline constexpr std::uint64_t kSplit = 0x04;
inline constexpr std::uint64_t kPartition = 0x05;
inline constexpr std::uint64_t kElevator = 0x06;
inline constexpr std::uint64_t kTrain = 0x07;
inline constexpr std::uint64_t kChooseHubs = 0x08;
inline constexpr std::uint64_t kGossipPeer = 0x09;
inline constexpr std::uint64_t kFault = 0x0a;
inline constexpr std::uint64_t kChurn = 0x0b;
inline constexpr std::uint64_t kChurnModel = 0x0c;
inline constexpr std::uint64_t kChurnShard = 0x0d;
inline constexpr std::uint64_t kChurnCache = 0x0e;
inline constexpr std::uint64_t kReserve = 0x0f;
inline constexpr std::uint64_t kSyntheticData = 0x10;
}  // namespace seed_tag

}  // namespace healsim
