#pragma once

#include <cstdint>

// Counter-based randomness: every draw is a pure function of its key, so
// results do not depend on thread count or scheduling.
namespace pip::rng {

// Stream tags keep unrelated uses of one seed apart.
enum class Stream : std::uint64_t {
  shuffle_target = 0x5348554646ull,
  merge_coin = 0x434f494eull,
  merge_coin_word = 0x434f4957ull,
  center = 0x43454e54ull,
  contraction_coin = 0x46434f49ull,
  encoder = 0x454e434full,
  generator = 0x47454eull,
};

constexpr std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t hash(std::uint64_t seed, Stream s, std::uint64_t a,
                             std::uint64_t b = 0) {
  std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ull);
  h = mix(h ^ (static_cast<std::uint64_t>(s) * 0xd6e8feb86659fd93ull));
  h = mix(h ^ (a + 0x632be59bd9b4e019ull));
  return mix(h ^ (b * 0x9e3779b97f4a7c15ull + 0x85157af5ull));
}

constexpr bool coin(std::uint64_t seed, Stream s, std::uint64_t a,
                    std::uint64_t b = 0) {
  return (hash(seed, s, a, b) >> 63) != 0;
}

// Uniform in [0, bound) via multiply-shift with rejection; the retry counter
// is folded into the key so the result stays a pure function of (seed, s, a).
inline std::uint64_t below(std::uint64_t seed, Stream s, std::uint64_t a,
                           std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (std::uint64_t attempt = 0;; ++attempt) {
    const std::uint64_t x = hash(seed, s, a, attempt);
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold)
      return static_cast<std::uint64_t>(m >> 64);
  }
}

// Sequential generator for inputs and tests (not used inside algorithms).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const unsigned __int128 m =
          static_cast<unsigned __int128>(next()) * bound;
      if (static_cast<std::uint64_t>(m) >= threshold)
        return static_cast<std::uint64_t>(m >> 64);
    }
  }
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next(); }

 private:
  std::uint64_t state_;
};

}  // namespace pip::rng
