#pragma once

#include <cstdint>

namespace tlsf {

// Counter-based generator: the value at (seed, stream, counter) is a pure
// function of the three, so draws never depend on call order.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t bits(std::uint64_t counter) const noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace tlsf
