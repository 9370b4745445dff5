#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

namespace matmi {

// Counter-based generator: output n of stream (key) is a pure function of
// (key, n), so any sample can be regenerated independently of thread order.
// The mixing function is SplitMix64's finalizer.
class CounterRng {
 public:
  static constexpr std::string_view kName = "splitmix64-counter";

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  // Stream key derived from a seed and up to three indices.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0, std::uint64_t c = 0);

  std::uint64_t bits(std::uint64_t counter) const;
  // Uniform on (0, 1].
  double uniform(std::uint64_t counter) const;
  // Two independent standard normals (Box-Muller on counters 2n, 2n+1).
  std::pair<double, double> normal_pair(std::uint64_t n) const;

 private:
  std::uint64_t key_;
};

}  // namespace matmi
