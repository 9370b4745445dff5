#include "matmi/rng.hpp"

#include <cmath>
#include <numbers>

namespace matmi {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t k = mix(seed + kGolden);
  k = mix(k ^ (a + 1) * kGolden);
  k = mix(k ^ (b + 1) * 0xD1B54A32D192ED03ull);
  return mix(k ^ (c + 1) * 0x8CB92BA72F3D8DD7ull);
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const { return mix(key_ + (counter + 1) * kGolden); }

double CounterRng::uniform(std::uint64_t counter) const {
  return static_cast<double>((bits(counter) >> 11) + 1) * 0x1.0p-53;
}

std::pair<double, double> CounterRng::normal_pair(std::uint64_t n) const {
  const double r = std::sqrt(-2.0 * std::log(uniform(2 * n)));
  const double phi = 2.0 * std::numbers::pi * uniform(2 * n + 1);
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace matmi
