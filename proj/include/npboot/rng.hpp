#pragma once

#include <cstdint>

namespace npboot {

/** One SplitMix64 step.  Used to derive stream keys and to seed generators. */
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/**
 * xoshiro256** with SplitMix64 seeding.  Construction touches four words,
 * so every Monte-Carlo task (path, bootstrap replicate, replication) can
 * own an independent generator without measurable setup cost.  Satisfies
 * uniform_random_bit_generator, so <random> distributions apply directly.
 */
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64_next(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

/**
 * Value-type handle for a deterministic random stream.  Child streams are
 * pure functions of (key, index), so tasks scheduled in any order, on any
 * number of workers, draw exactly the same numbers.
 */
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  /** Independent child stream for task `index`. */
  RngStream substream(std::uint64_t index) const {
    std::uint64_t s = key_ + (index + 1) * 0x9E3779B97F4A7C15ULL;
    splitmix64_next(s);
    return RngStream(splitmix64_next(s));
  }

  Xoshiro256 generator() const { return Xoshiro256(key_); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace npboot
