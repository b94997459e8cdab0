#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fox/feature_map.hpp"
#include "fox/predictor_bank.hpp"
#include "fox/search_space.hpp"

namespace fox {

// Synthetic ground truth: one true linear model per image size for each
// target, plus the label-noise levels used when generating data from it.
struct PlantedModel {
  // Coefficient vectors are intercept first, then feature_names(spec) order.
  std::map<int, std::vector<double>> accuracy_coefficients;
  std::map<int, std::vector<double>> latency_coefficients;
  double noise_accuracy = 0.0;  // percent
  double noise_latency = 0.0;   // ms
  std::uint64_t seed = 0;
};

inline void check_planted(const PlantedModel& planted,
                          const SearchSpaceSpec& spec) {
  const std::size_t k = static_cast<std::size_t>(feature_count(spec)) + 1;
  for (const auto& m :
       {planted.accuracy_coefficients, planted.latency_coefficients})
    for (const auto& [size, coeffs] : m)
      if (coeffs.size() != k)
        throw InvalidInput("planted model: image size " + std::to_string(size) +
                           " has " + std::to_string(coeffs.size()) +
                           " coefficients, expected " + std::to_string(k));
}

// Noiseless (accuracy, latency) under the planted truth.
inline std::pair<double, double> evaluate_true(const PlantedModel& planted,
                                               const SearchSpaceSpec& spec,
                                               const Architecture& arch) {
  const auto acc_it = planted.accuracy_coefficients.find(arch.image_size);
  const auto lat_it = planted.latency_coefficients.find(arch.image_size);
  if (acc_it == planted.accuracy_coefficients.end() ||
      lat_it == planted.latency_coefficients.end())
    throw InvalidInput("planted model: no coefficients for image size " +
                       std::to_string(arch.image_size));
  const FeatureVector fv = featurize(arch, spec);
  auto dot = [&](const std::vector<double>& coeffs) {
    double y = coeffs[0];
    for (std::size_t i = 0; i < fv.values.size(); ++i)
      y += coeffs[i + 1] * fv.values[i];
    return y;
  };
  return {dot(acc_it->second), dot(lat_it->second)};
}

// Random planted landscape mirroring the measurement protocol: per image
// size, accuracy concentrates on one depth parameter (rotating across image
// sizes) with a fixed full-range span, plus per-feature contributions three
// orders of magnitude smaller; latency leans on totals, depths and kernels
// with positive coefficients. Feature scales are normalized by each
// feature's value range over the space so coefficient draws are comparable.
inline PlantedModel random_planted(const SearchSpaceSpec& spec,
                                   std::uint64_t seed,
                                   double noise_accuracy = 0.1,
                                   double noise_latency = 0.5,
                                   double accuracy_span = 10.0) {
  PlantedModel planted;
  planted.seed = seed;
  planted.noise_accuracy = noise_accuracy;
  planted.noise_latency = noise_latency;
  Rng rng(seed);

  const int m = spec.unit_count();
  const int features = feature_count(spec);

  // Value ranges per feature, derived from the candidate domains.
  std::vector<double> range(features, 1.0);
  for (int j = 0; j < m; ++j) {
    const UnitSpec& u = spec.units[j];
    const double d_min = u.depth_candidates.front();
    const double d_max = u.depth_candidates.back();
    const double e_min = u.expansion_candidates.front();
    const double e_max = u.expansion_candidates.back();
    const double k_min = u.kernel_candidates.front();
    const double k_max = u.kernel_candidates.back();
    range[6 * j + 0] = std::max(d_max - d_min, 1.0);
    range[6 * j + 1] = std::max(e_max - e_min, 1.0);
    range[6 * j + 2] = std::max(k_max - k_min, 1.0);
    range[6 * j + 3] = std::max(e_max * d_max - e_min * d_min, 1.0);
    range[6 * j + 4] = std::max(e_max * d_max * d_max - e_min * d_min * d_min, 1.0);
    range[6 * j + 5] = std::max(k_max * d_max - k_min * d_min, 1.0);
  }
  for (int jp = 0; jp < m - 1; ++jp) {
    const UnitSpec& u = spec.units[jp + 1];
    range[6 * m + 2 * jp] =
        std::max<double>(u.expansion_candidates.back() - u.expansion_candidates.front(), 1.0);
    range[6 * m + 2 * jp + 1] =
        std::max<double>(u.kernel_candidates.back() - u.kernel_candidates.front(), 1.0);
  }

  int size_index = 0;
  for (int size : spec.image_sizes) {
    std::vector<double> acc(features + 1, 0.0);
    std::vector<double> lat(features + 1, 0.0);

    const int dominant_unit = size_index % m;
    const int dominant_feature = 6 * dominant_unit;  // that unit's depth term
    for (int f = 0; f < features; ++f)
      acc[f + 1] = (rng.uniform_real() * 2.0 - 1.0) * 2e-3 * accuracy_span / range[f];
    acc[dominant_feature + 1] = accuracy_span / range[dominant_feature];
    // Base level drifts a little per image size, like real measurements.
    acc[0] = 66.0 + 0.6 * size_index;

    lat[0] = 18.0 + 2.0 * size_index;
    for (int j = 0; j < m; ++j) {
      lat[6 * j + 0 + 1] = (0.8 + 0.4 * rng.uniform_real());  // depth
      lat[6 * j + 3 + 1] =
          (0.3 + 0.2 * rng.uniform_real()) * 10.0 / range[6 * j + 3];  // total expansion
      lat[6 * j + 5 + 1] =
          (0.2 + 0.2 * rng.uniform_real()) * 6.0 / range[6 * j + 5];  // K^avg*D
    }
    for (int jp = 0; jp < m - 1; ++jp)
      lat[6 * m + 2 * jp + 1] =
          (0.2 + 0.2 * rng.uniform_real()) * 2.0 / range[6 * m + 2 * jp];

    planted.accuracy_coefficients[size] = std::move(acc);
    planted.latency_coefficients[size] = std::move(lat);
    ++size_index;
  }
  return planted;
}

// Wraps planted coefficients into a predictor bank without any fitting:
// predictions equal the planted truth exactly, and every nonzero coefficient
// is marked strongly significant (|t| = 50) while zero coefficients stay
// insignificant. This is the "planted bank" used to study search quality in
// isolation from surrogate quality.
inline PredictorBank make_planted_bank(const PlantedModel& planted,
                                       const SearchSpaceSpec& spec,
                                       long pseudo_n = 300) {
  check_planted(planted, spec);
  auto as_model = [&](const std::vector<double>& coeffs, const char* label) {
    RegressionModel model;
    model.coefficients = coeffs;
    model.standard_errors.resize(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      model.standard_errors[i] =
          coeffs[i] == 0.0 ? 1.0 : std::fabs(coeffs[i]) / 50.0;
    model.n = pseudo_n;
    model.k = static_cast<int>(coeffs.size());
    model.r_squared = 1.0;
    model.adjusted_r_squared = 1.0;
    model.target_label = label;
    return model;
  };
  std::map<int, TrainedPair> pairs;
  for (const auto& [size, acc] : planted.accuracy_coefficients) {
    const auto lat_it = planted.latency_coefficients.find(size);
    if (lat_it == planted.latency_coefficients.end()) continue;
    TrainedPair pair;
    pair.accuracy = as_model(acc, kAccuracyLabel);
    pair.latency = as_model(lat_it->second, kLatencyLabel);
    pairs[size] = std::move(pair);
  }
  return make_bank(spec, std::move(pairs));
}

// ---------------------------------------------------------------------------
// Exhaustive search

struct BruteForceResult {
  bool feasible = false;
  Architecture best;
  double accuracy = 0.0;
  double latency = 0.0;
  std::uint64_t evaluated = 0;
};

// Enumerates every architecture at the given image size, evaluates the bank,
// and returns the predicted-accuracy argmax among those with predicted
// latency strictly below the budget. Ties go to the earlier architecture in
// enumeration order. Refuses spaces larger than `cap`.
inline BruteForceResult brute_force_search(const PredictorBank& bank,
                                           const SearchSpaceSpec& spec,
                                           double latency_budget,
                                           int image_size,
                                           std::uint64_t cap = 1000000) {
  const BigInt total = cardinality_at_size(spec);
  if (total > BigInt(cap))
    throw EnumerationTooLargeError(
        "brute force refused: " + total.str() +
            " architectures at one image size, cap is " + std::to_string(cap),
        total.str());
  (void)bank.at(image_size);  // fail fast when untrained

  BruteForceResult result;
  for_each_architecture_at(spec, image_size, [&](const Architecture& arch) {
    const auto [acc, lat] = predict_performance(bank, spec, arch);
    ++result.evaluated;
    if (lat < latency_budget && (!result.feasible || acc > result.accuracy)) {
      result.feasible = true;
      result.best = arch;
      result.accuracy = acc;
      result.latency = lat;
    }
  });
  return result;
}

}  // namespace fox
