#pragma once

#include <cstdint>
#include <random>

namespace anoverify {

// splitmix64; used both as a seed mixer and to derive per-trial substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent seed for (master seed, stream tag, item index).
// Trials seeded this way give results independent of execution order, so
// a --threads change cannot alter any estimate.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= stream * 0x9e3779b97f4a7c15ull;
  std::uint64_t b = splitmix64(s);
  s ^= index + 0x632be59bd9b4e019ull;
  std::uint64_t c = splitmix64(s);
  return a ^ (b << 1) ^ c;
}

// Seeded random source handed to sampling code. One per trajectory.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Index drawn from a probability vector by cdf inversion.
  template <typename Probs>
  std::size_t categorical(const Probs& probs) {
    double u = uniform();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      last = i;
      if (u < acc) return i;
    }
    return last;  // guard against acc < 1 from rounding
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace anoverify
