#pragma once

#include <string>
#include <vector>

#include "fox/annealer.hpp"
#include "fox/oracle.hpp"
#include "fox/search_space.hpp"

namespace fox::test {

// Single-unit space with one choice everywhere.
inline SearchSpaceSpec singleton_spec() {
  SearchSpaceSpec spec;
  spec.name = "singleton";
  spec.image_sizes = {128};
  UnitSpec u;
  u.kernel_candidates = {3};
  u.expansion_candidates = {2};
  u.depth_candidates = {1};
  spec.units = {u};
  return spec;
}

// Small space used across tests: 1 image size, 2 units,
// kernels {3,5}, expansions {2,4}, depths {1,2,3}; 84^2 = 7056 architectures.
inline SearchSpaceSpec small_spec() {
  SearchSpaceSpec spec;
  spec.name = "small";
  spec.image_sizes = {160};
  UnitSpec u;
  u.kernel_candidates = {3, 5};
  u.expansion_candidates = {2, 4};
  u.depth_candidates = {1, 2, 3};
  spec.units = {u, u};
  return spec;
}

// Search benchmark: 1 image size, 3 units, kernels {3,5}, expansions {2,4},
// depths {1,2}; 20^3 = 8000 architectures, 16 slots.
inline SearchSpaceSpec bench_spec() {
  SearchSpaceSpec spec;
  spec.name = "bench";
  spec.image_sizes = {160};
  UnitSpec u;
  u.kernel_candidates = {3, 5};
  u.expansion_candidates = {2, 4};
  u.depth_candidates = {1, 2};
  spec.units = {u, u, u};
  return spec;
}

// Benchmark landscape on bench_spec: all accuracy signal sits on three unit-2
// slots (depth plus the first layer's kernel and expansion, 3 of 16 slots);
// latency grows with the depths and total expansions of units 1 and 3.
// Against budget 24 ms the constraint excludes about 69% of uniform samples,
// and the optimum (verified by brute force) is accuracy 89 at latency 18.
inline PlantedModel bench_planted(const SearchSpaceSpec& spec) {
  const int features = feature_count(spec);  // 22
  PlantedModel planted;
  std::vector<double> acc(features + 1, 0.0);
  acc[0] = 70.0;
  acc[1 + 6] = 3.0;   // D_2
  acc[1 + 18] = 2.0;  // E_1,2
  acc[1 + 19] = 1.0;  // K_1,2
  std::vector<double> lat(features + 1, 0.0);
  lat[0] = 10.0;
  lat[1 + 0] = 2.0;   // D_1
  lat[1 + 3] = 1.0;   // E^total_1
  lat[1 + 12] = 2.0;  // D_3
  lat[1 + 15] = 1.0;  // E^total_3
  planted.accuracy_coefficients[160] = acc;
  planted.latency_coefficients[160] = lat;
  return planted;
}

inline constexpr double kBenchLatencyBudget = 24.0;

// Converges within a 2000-evaluation budget on the benchmark landscape.
inline AnnealConfig bench_config(std::uint64_t seed) {
  AnnealConfig config;
  config.initial_temperature = 1.0;
  config.boltzmann_k = 2.0;
  config.cooling_factor = 0.7;
  config.min_temperature = 0.001;
  config.rejections_per_cool = 20;
  config.max_evaluations = 2000;
  config.seed = seed;
  return config;
}

// Architecture with every slot set to the same kernel/expansion/depth values.
inline Architecture uniform_arch(const SearchSpaceSpec& spec, int image_size,
                                 int depth, int kernel, int expansion) {
  Architecture arch;
  arch.image_size = image_size;
  for (const UnitSpec& us : spec.units) {
    UnitChoice uc;
    uc.depth = depth;
    uc.kernels.assign(us.max_depth(), kernel);
    uc.expansions.assign(us.max_depth(), expansion);
    arch.units.push_back(uc);
  }
  return arch;
}

inline int count_differing_slots(const Architecture& a, const Architecture& b,
                                 const SearchSpaceSpec& spec) {
  int diff = 0;
  for (int s = 0; s < slot_count(spec); ++s)
    if (get_slot(a, spec, s) != get_slot(b, spec, s)) ++diff;
  return diff;
}

}  // namespace fox::test
