#pragma once

#include <cstdint>
#include <string_view>

namespace imfault {

// Counter-based generator: output i is a SplitMix64 finalization of
// (key + i * golden_gamma). Fully determined by the seed; no platform
// dependent distribution code is used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next_u64() noexcept;
  // [0, 1) with 53 random bits
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  // uniform integer in [0, bound)
  std::uint64_t below(std::uint64_t bound) noexcept;
  // standard normal, Box-Muller
  double normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

// Per-module seed: mix64(master ^ fnv1a64(tag)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

}  // namespace imfault
