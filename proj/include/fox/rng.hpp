#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fox/errors.hpp"

namespace fox {

// Seeded random source with fully specified draw algorithms.
//
// The standard <random> distributions are implementation-defined, so the
// mappings from raw engine output to indices/reals/normals are spelled out
// here. Identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw InvalidInput("uniform_index: n must be positive");
    if (n == 1) return 0;
    const std::uint64_t limit =
        UINT64_MAX - (UINT64_MAX % static_cast<std::uint64_t>(n));
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % static_cast<std::uint64_t>(n));
  }

  // Uniform real in [0, 1) with 53-bit resolution.
  double uniform_real() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard Box-Muller transform; consumes two engine draws per value.
  double normal(double mean = 0.0, double sd = 1.0) {
    const double u1 =
        (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double z =
        std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    return mean + sd * z;
  }

  // Picks from a candidate list uniformly.
  template <class T>
  const T& pick(const std::vector<T>& candidates) {
    return candidates[uniform_index(candidates.size())];
  }

 private:
  std::mt19937_64 engine_;
};

// Draws `count` distinct indices with probability proportional to `weights`,
// without replacement. Indices with weight <= 0 are never selected; `count`
// is clamped to the number of selectable indices.
inline std::vector<std::size_t> weighted_sample_without_replacement(
    const std::vector<double>& weights, std::size_t count, Rng& rng) {
  std::vector<double> w = weights;
  double total = 0.0;
  std::size_t selectable = 0;
  for (double x : w) {
    if (x > 0.0) {
      total += x;
      ++selectable;
    }
  }
  if (count > selectable) count = selectable;

  std::vector<std::size_t> picked;
  picked.reserve(count);
  for (std::size_t draw = 0; draw < count; ++draw) {
    double target = rng.uniform_real() * total;
    std::size_t chosen = w.size();
    double cum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] <= 0.0) continue;
      cum += w[i];
      if (target < cum) {
        chosen = i;
        break;
      }
    }
    if (chosen == w.size()) {
      // Floating-point slack at the top of the cumulative walk: take the
      // last selectable index.
      for (std::size_t i = w.size(); i-- > 0;) {
        if (w[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    }
    picked.push_back(chosen);
    total -= w[chosen];
    w[chosen] = 0.0;
  }
  return picked;
}

}  // namespace fox
