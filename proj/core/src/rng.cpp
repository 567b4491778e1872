#include "tailtest/rng.hpp"

#include <cmath>
#include <numbers>

namespace tailtest {

RngStream::RngStream(std::uint64_t seed) noexcept {
  std::uint64_t x = seed;
  for (auto& word : state_) {
    x += 0x9E3779B97F4A7C15ULL;
    word = mix64(x);
  }
}

double RngStream::exponential() noexcept { return -std::log(uniform()); }

double RngStream::normal() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tailtest
