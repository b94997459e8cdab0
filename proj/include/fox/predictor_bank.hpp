#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fox/dataset.hpp"
#include "fox/feature_map.hpp"
#include "fox/regression.hpp"
#include "fox/search_space.hpp"

namespace fox {

inline constexpr const char* kAccuracyLabel = "accuracy(%)";
inline constexpr const char* kLatencyLabel = "latency(ms)";

// The trained (accuracy, latency) model pair for one image size.
struct TrainedPair {
  RegressionModel accuracy;
  RegressionModel latency;
  FitDiagnostics accuracy_diag;
  FitDiagnostics latency_diag;
};

// Per-image-size accuracy and latency predictors sharing one feature order.
// Image sizes without training data are present but untrained; asking them
// for a prediction is an error.
struct PredictorBank {
  std::string spec_fingerprint;
  std::string spec_name;
  std::vector<std::string> feature_names;
  std::map<int, std::optional<TrainedPair>> models;  // keyed by image size

  bool trained_for(int image_size) const {
    auto it = models.find(image_size);
    return it != models.end() && it->second.has_value();
  }

  const TrainedPair& at(int image_size) const {
    auto it = models.find(image_size);
    if (it == models.end() || !it->second.has_value())
      throw UntrainedImageSizeError(
          "no predictor for image size " + std::to_string(image_size),
          image_size);
    return *it->second;
  }
};

// Assembles a bank from externally constructed models (planted landscapes,
// deserialization). Sizes absent from `pairs` are marked untrained. Every
// model must share the spec's feature ordering, so k = feature count + 1.
inline PredictorBank make_bank(const SearchSpaceSpec& spec,
                               std::map<int, TrainedPair> pairs) {
  PredictorBank bank;
  bank.spec_fingerprint = spec_fingerprint(spec);
  bank.spec_name = spec.name;
  bank.feature_names = feature_names(spec);
  const int k = static_cast<int>(bank.feature_names.size()) + 1;
  for (const auto& [size, pair] : pairs) {
    for (const RegressionModel* m : {&pair.accuracy, &pair.latency})
      if (m->k != k || static_cast<int>(m->coefficients.size()) != k)
        throw InvalidInput("bank: model for image size " +
                           std::to_string(size) + " has " +
                           std::to_string(m->k) + " coefficients, spec needs " +
                           std::to_string(k));
  }
  for (int size : spec.image_sizes) bank.models[size] = std::nullopt;
  for (auto& [size, pair] : pairs) bank.models[size] = std::move(pair);
  return bank;
}

// Partitions the records by image size, featurizes, and fits one accuracy
// and one latency model per partition. A partition with 0 < n <= k rows
// cannot identify the coefficients and is a hard error; an empty partition
// leaves that image size untrained.
inline PredictorBank train_bank(const std::vector<DatasetRecord>& dataset,
                                const SearchSpaceSpec& spec) {
  std::map<int, std::vector<const DatasetRecord*>> partitions;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const DatasetRecord& rec = dataset[i];
    const Validity v = validate(rec.arch, spec);
    if (!v.ok())
      throw InvalidInput("train_bank: record " + std::to_string(i) +
                         " invalid: " + v.violations[0]);
    partitions[rec.arch.image_size].push_back(&rec);
  }

  const std::vector<std::string> names = feature_names(spec);
  const int k = static_cast<int>(names.size()) + 1;

  std::map<int, TrainedPair> pairs;
  for (const auto& [size, records] : partitions) {
    const long n = static_cast<long>(records.size());
    if (n <= k)
      throw InsufficientDataError(
          "insufficient data for image size " + std::to_string(size) + ": " +
              std::to_string(n) + " records for " + std::to_string(k) +
              " coefficients (need n > k)",
          n, k);
    std::vector<std::vector<double>> X;
    std::vector<double> acc(n), lat(n);
    X.reserve(n);
    for (long i = 0; i < n; ++i) {
      X.push_back(featurize(records[i]->arch, spec).values);
      acc[i] = records[i]->accuracy;
      lat[i] = records[i]->latency_ms;
    }
    TrainedPair pair;
    try {
      pair.accuracy = fit(X, acc, kAccuracyLabel);
      pair.latency = fit(X, lat, kLatencyLabel);
    } catch (const CollinearError& e) {
      const int col = e.dependent_column;
      const std::string which =
          col == 0 ? std::string("intercept") : names[col - 1];
      throw CollinearError("image size " + std::to_string(size) +
                               ": collinear features; dependent column is " +
                               which,
                           col);
    }
    pair.accuracy_diag = residual_report(pair.accuracy, X, acc);
    pair.latency_diag = residual_report(pair.latency, X, lat);
    pairs[size] = std::move(pair);
  }
  return make_bank(spec, std::move(pairs));
}

// Applies the model pair matching arch.image_size to featurize(arch).
// Returns (predicted accuracy %, predicted latency ms).
inline std::pair<double, double> predict_performance(
    const PredictorBank& bank, const SearchSpaceSpec& spec,
    const Architecture& arch) {
  const TrainedPair& pair = bank.at(arch.image_size);
  const FeatureVector fv = featurize(arch, spec);
  return {predict(pair.accuracy, fv.values), predict(pair.latency, fv.values)};
}

// ---------------------------------------------------------------------------
// Guidance weights

struct GuidanceOptions {
  double significance = 0.05;  // p-value gate for a feature to contribute
  double floor = 0.05;         // weight of slots with no significant feature
  double cap = 1e12;           // upper bound, also applied to infinite t
};

// Two-phase sampling weights for the annealer. Phase 1 spotlights the
// architecture parameters whose accuracy-model features are statistically
// significant: each slot gets the largest |t| among its features with
// p < significance, floored so no slot is unreachable. Phase 2 is the
// uniform all-ones weighting.
inline std::pair<ParamWeights, ParamWeights> guidance_weights(
    const PredictorBank& bank, const SearchSpaceSpec& spec, int image_size,
    const GuidanceOptions& options = {}) {
  const TrainedPair& pair = bank.at(image_size);
  const RegressionModel& acc = pair.accuracy;
  const std::vector<double> t = t_values(acc);
  const std::vector<double> p =
      p_values(t, static_cast<double>(acc.degrees_of_freedom()));

  ParamWeights phase1;
  phase1.values.resize(slot_count(spec), options.floor);
  for (int slot = 0; slot < slot_count(spec); ++slot) {
    double best = 0.0;
    for (int f : slot_feature_indices(spec, slot)) {
      if (p[f + 1] >= options.significance) continue;  // +1 skips intercept
      const double magnitude = std::min(std::fabs(t[f + 1]), options.cap);
      best = std::max(best, magnitude);
    }
    phase1.values[slot] = std::max(best, options.floor);
  }
  return {phase1, ParamWeights::uniform(spec)};
}

// ---------------------------------------------------------------------------
// Explainability-driven manual adjustment

// One single-step move of one architecture parameter, with its predicted
// effect on both targets.
struct Adjustment {
  int slot_index = -1;
  std::string slot;
  int from_value = 0;
  int to_value = 0;
  int delta_steps = 0;         // +-1 within the sorted candidate set
  double latency_delta = 0.0;  // predicted, ms
  double accuracy_delta = 0.0; // predicted, percent
  double latency_p = 1.0;      // smallest p among the slot's latency features
  double accuracy_p = 1.0;
};

struct AdjustmentReport {
  std::vector<Adjustment> items;
  // False when no suggested move brings the architecture within budget on
  // its own ("insufficient single-step moves").
  bool sufficient = false;
};

// Enumerates single-slot single-step moves, keeps the latency-reducing ones
// whose latency-model feature is significant, and ranks them by predicted
// latency reduction per unit of predicted accuracy loss: accuracy-lossless
// moves first (largest reduction first), then ascending loss/reduction
// ratio. Returns an empty report when the architecture is already within
// budget. The image-size slot is never proposed: switching image size
// switches the model pair, so its deltas are not comparable.
inline AdjustmentReport suggest_adjustment(const PredictorBank& bank,
                                           const SearchSpaceSpec& spec,
                                           const Architecture& arch,
                                           double latency_budget,
                                           double significance = 0.05) {
  const auto [base_acc, base_lat] = predict_performance(bank, spec, arch);
  AdjustmentReport report;
  if (base_lat <= latency_budget) {
    report.sufficient = true;
    return report;
  }

  const TrainedPair& pair = bank.at(arch.image_size);
  const std::vector<double> lat_t = t_values(pair.latency);
  const std::vector<double> lat_p =
      p_values(lat_t, static_cast<double>(pair.latency.degrees_of_freedom()));
  const std::vector<double> acc_t = t_values(pair.accuracy);
  const std::vector<double> acc_p =
      p_values(acc_t, static_cast<double>(pair.accuracy.degrees_of_freedom()));

  for (int slot = 1; slot < slot_count(spec); ++slot) {
    const std::vector<int>& candidates = slot_candidates(spec, slot);
    if (candidates.size() < 2) continue;
    const int current = get_slot(arch, spec, slot);
    const auto pos = std::find(candidates.begin(), candidates.end(), current);
    if (pos == candidates.end()) continue;  // inactive slot drifted off-domain

    double slot_lat_p = 1.0;
    double slot_acc_p = 1.0;
    for (int f : slot_feature_indices(spec, slot)) {
      slot_lat_p = std::min(slot_lat_p, lat_p[f + 1]);
      slot_acc_p = std::min(slot_acc_p, acc_p[f + 1]);
    }
    if (slot_lat_p >= significance) continue;

    for (int step : {-1, +1}) {
      const auto target = pos - candidates.begin() + step;
      if (target < 0 || target >= static_cast<long>(candidates.size()))
        continue;
      Architecture moved = arch;
      set_slot(moved, spec, slot, candidates[target]);
      const auto [new_acc, new_lat] = predict_performance(bank, spec, moved);
      const double d_lat = new_lat - base_lat;
      if (d_lat >= -1e-12) continue;  // not a latency reduction

      Adjustment adj;
      adj.slot_index = slot;
      adj.slot = slot_name(spec, slot);
      adj.from_value = current;
      adj.to_value = candidates[target];
      adj.delta_steps = step;
      adj.latency_delta = d_lat;
      adj.accuracy_delta = new_acc - base_acc;
      adj.latency_p = slot_lat_p;
      adj.accuracy_p = slot_acc_p;
      report.items.push_back(std::move(adj));
    }
  }

  auto lossless = [](const Adjustment& a) { return a.accuracy_delta >= 0.0; };
  std::sort(report.items.begin(), report.items.end(),
            [&](const Adjustment& a, const Adjustment& b) {
              if (lossless(a) != lossless(b)) return lossless(a);
              if (lossless(a)) {
                if (a.latency_delta != b.latency_delta)
                  return a.latency_delta < b.latency_delta;  // bigger cut first
              } else {
                const double ra = -a.accuracy_delta / -a.latency_delta;
                const double rb = -b.accuracy_delta / -b.latency_delta;
                if (ra != rb) return ra < rb;  // cheapest loss per ms first
              }
              if (a.slot_index != b.slot_index) return a.slot_index < b.slot_index;
              return a.delta_steps < b.delta_steps;
            });

  for (const Adjustment& adj : report.items) {
    if (base_lat + adj.latency_delta <= latency_budget) {
      report.sufficient = true;
      break;
    }
  }
  return report;
}

}  // namespace fox
