#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace stemmaplace {

// Seeded generator whose integer and real draws are identical across standard
// libraries (std::uniform_int_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Uniform real in [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

// Independent stream seed for (seed, stream); used for per-iteration and
// per-edge generators so parallel and serial runs agree.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

std::uint64_t fnv1a(std::string_view text);

}  // namespace stemmaplace
