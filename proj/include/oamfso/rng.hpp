#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace oamfso {

// xoshiro256++ seeded through SplitMix64. Distributions are implemented here
// rather than taken from <random> so that streams are bit-identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream addressed by a path below a master seed, e.g.
  // substream(seed, {realization, screen}).
  static Rng substream(std::uint64_t master_seed,
                       std::initializer_list<std::uint64_t> path);

  std::uint64_t next();
  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace oamfso
