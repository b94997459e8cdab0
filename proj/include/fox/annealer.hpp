#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "fox/predictor_bank.hpp"
#include "fox/search_space.hpp"

namespace fox {

struct AnnealConfig {
  double initial_temperature = 8.0;   // also the early mutation width
  double boltzmann_k = 1.0;
  int rejections_per_cool = 100;      // cool when a rejection lands on C % n == 0
  double cooling_factor = 0.9;        // geometric schedule
  double min_temperature = 0.01;      // stop once cooling drops below this
  int max_feasibility_resamples = 10000;
  int phase_switch_count = 0;         // iterations before phase 2; 0 means 2n
  std::uint64_t max_evaluations = 0;  // predictor-pair budget; 0 means unlimited
  bool uphill_only_acceptance = false;    // ablation only, see accept functions
  std::uint64_t seed = 0;

  int resolved_phase_switch() const {
    return phase_switch_count > 0 ? phase_switch_count
                                  : 2 * rejections_per_cool;
  }
};

inline void check_config(const AnnealConfig& config) {
  if (!(config.initial_temperature > config.min_temperature) ||
      !(config.min_temperature > 0.0))
    throw InvalidInput("anneal config: need T0 > T_min > 0");
  if (!(config.boltzmann_k > 0.0))
    throw InvalidInput("anneal config: k must be positive");
  if (!(config.cooling_factor > 0.0 && config.cooling_factor < 1.0))
    throw InvalidInput("anneal config: cooling factor must be in (0, 1)");
  if (config.rejections_per_cool < 1)
    throw InvalidInput("anneal config: n must be >= 1");
  if (config.max_feasibility_resamples < 1)
    throw InvalidInput("anneal config: max_feasibility_resamples must be >= 1");
}

// Metropolis rule: always accept an improvement; accept a deterioration with
// probability exp(delta / kT).
inline bool metropolis_accept(double delta, double k, double T, double r) {
  if (delta > 0.0) return true;
  return r < std::exp(delta / (k * T));
}

// Flipped-comparison variant ("delta > 0 or r > exp(-delta / kT)"): for
// delta <= 0 the right side exceeds 1, so a worse candidate is never
// accepted and the search degenerates to uphill-only moves. Kept for
// ablation against the Metropolis default.
inline bool uphill_only_accept(double delta, double k, double T, double r) {
  if (delta > 0.0) return true;
  return r > std::exp(-delta / (k * T));
}

inline double cool(double T, const AnnealConfig& config) {
  return config.cooling_factor * T;
}

struct TraceEntry {
  long iteration = 0;           // 0 is the initial feasible sample
  std::uint64_t evaluations = 0;  // cumulative predictor-pair evaluations
  double accuracy = 0.0;
  double latency = 0.0;
  double temperature = 0.0;
  bool accepted = false;
  int phase = 1;
};

struct SearchTrace {
  std::vector<TraceEntry> entries;
};

struct SearchResult {
  Architecture best;
  double best_accuracy = 0.0;
  double best_latency = 0.0;
  std::uint64_t evaluations = 0;
  SearchTrace trace;
};

// Explicit weight schedule; when absent, search derives it from the bank.
struct WeightSchedule {
  ParamWeights phase1;
  ParamWeights phase2;
};

namespace detail {

struct Evaluated {
  Architecture arch;
  double accuracy = 0.0;
  double latency = 0.0;
};

struct EvalBudget {
  std::uint64_t used = 0;
  std::uint64_t cap = 0;  // 0 = unlimited
  bool exhausted() const { return cap != 0 && used >= cap; }
};

}  // namespace detail

// Mutates `current` (ceil(T) slots, clamped to [1, slot count]) and
// re-evaluates both predictors until the candidate's predicted latency is
// strictly below the budget. Throws InfeasibleError once
// max_feasibility_resamples candidates were rejected, carrying the best
// latency seen.
inline std::pair<detail::Evaluated, std::uint64_t> sample_model(
    const PredictorBank& bank, const SearchSpaceSpec& spec,
    double latency_budget, double T, const ParamWeights& weights,
    const Architecture& current, Rng& rng, int max_resamples) {
  if (!(latency_budget > 0.0))
    throw InvalidInput("sample_model: latency budget must be positive");
  const int count = std::max(
      1, std::min(static_cast<int>(std::ceil(T)), slot_count(spec)));
  double best_latency_seen = std::numeric_limits<double>::infinity();
  std::uint64_t evaluations = 0;
  for (int attempt = 0; attempt < max_resamples; ++attempt) {
    detail::Evaluated cand;
    cand.arch = mutate(current, spec, count, weights, rng);
    const auto [acc, lat] = predict_performance(bank, spec, cand.arch);
    ++evaluations;
    cand.accuracy = acc;
    cand.latency = lat;
    if (lat < latency_budget) return {std::move(cand), evaluations};
    best_latency_seen = std::min(best_latency_seen, lat);
  }
  throw InfeasibleError(
      "latency constraint infeasible at this temperature: best candidate " +
          std::to_string(best_latency_seen) + " ms >= budget " +
          std::to_string(latency_budget) + " ms",
      best_latency_seen);
}

// Latency-constrained simulated-annealing search at one image size.
//
// Starts from a feasible uniform sample, then repeats: draw r, sample a
// feasible mutation of the current state, accept by the Metropolis rule on
// the accuracy difference; on rejection, cool when the iteration counter C
// lands on a multiple of n; switch from guidance weights to uniform weights
// once C reaches the phase-switch count. Stops when cooling crosses
// min_temperature or the evaluation budget is spent, and returns the best
// feasible architecture ever seen together with the full trace.
//
// The image size stays pinned for the whole run: its slot weight is forced
// to zero in both phases. Searching other sizes means running again.
inline SearchResult search(const PredictorBank& bank,
                           const SearchSpaceSpec& spec, double latency_budget,
                           const AnnealConfig& config, int image_size,
                           const std::optional<WeightSchedule>& schedule = {}) {
  check_config(config);
  if (!(latency_budget > 0.0))
    throw InvalidInput("search: latency budget must be positive");
  (void)bank.at(image_size);  // fail fast when untrained

  WeightSchedule weights_by_phase;
  if (schedule.has_value()) {
    weights_by_phase = *schedule;
  } else {
    auto [p1, p2] = guidance_weights(bank, spec, image_size);
    weights_by_phase = WeightSchedule{std::move(p1), std::move(p2)};
  }
  weights_by_phase.phase1.values[0] = 0.0;
  weights_by_phase.phase2.values[0] = 0.0;
  check_weights(weights_by_phase.phase1, spec);
  check_weights(weights_by_phase.phase2, spec);

  Rng rng(config.seed);
  detail::EvalBudget budget{0, config.max_evaluations};

  // Feasible starting point.
  detail::Evaluated current;
  bool found_start = false;
  double best_latency_seen = std::numeric_limits<double>::infinity();
  for (int attempt = 0; attempt < config.max_feasibility_resamples; ++attempt) {
    Architecture arch = sample_uniform_at(spec, image_size, rng);
    const auto [acc, lat] = predict_performance(bank, spec, arch);
    ++budget.used;
    best_latency_seen = std::min(best_latency_seen, lat);
    if (lat < latency_budget) {
      current = {std::move(arch), acc, lat};
      found_start = true;
      break;
    }
    if (budget.exhausted()) break;
  }
  if (!found_start)
    throw InfeasibleError(
        "no feasible initial architecture: best uniform sample " +
            std::to_string(best_latency_seen) + " ms >= budget " +
            std::to_string(latency_budget) + " ms",
        best_latency_seen);

  double T = config.initial_temperature;
  long C = 0;
  int phase = 1;
  const int phase_switch = config.resolved_phase_switch();
  const ParamWeights* active = &weights_by_phase.phase1;

  SearchResult result;
  result.best = current.arch;
  result.best_accuracy = current.accuracy;
  result.best_latency = current.latency;
  result.trace.entries.push_back(
      {0, budget.used, current.accuracy, current.latency, T, true, phase});

  while (!budget.exhausted()) {
    ++C;
    const double r = rng.uniform_real();

    std::optional<detail::Evaluated> candidate;
    for (int retry = 0; retry < 2; ++retry) {
      const int attempts_left =
          budget.cap == 0
              ? config.max_feasibility_resamples
              : static_cast<int>(std::min<std::uint64_t>(
                    config.max_feasibility_resamples, budget.cap - budget.used));
      if (attempts_left <= 0) break;  // budget exhausted mid-sample
      try {
        auto [cand, evals] =
            sample_model(bank, spec, latency_budget, T, *active, current.arch,
                         rng, attempts_left);
        budget.used += evals;
        candidate = std::move(cand);
        break;
      } catch (const InfeasibleError&) {
        budget.used += attempts_left;
        if (budget.cap != 0 && budget.used >= budget.cap) break;
        if (retry == 1) throw;  // already retried once at the cooled temperature
        T = cool(T, config);
        if (T < config.min_temperature) break;
      }
    }
    if (!candidate.has_value()) break;  // budget spent or schedule finished

    const double delta = candidate->accuracy - current.accuracy;
    const bool accepted =
        config.uphill_only_acceptance
            ? uphill_only_accept(delta, config.boltzmann_k, T, r)
            : metropolis_accept(delta, config.boltzmann_k, T, r);

    result.trace.entries.push_back({C, budget.used, candidate->accuracy,
                                    candidate->latency, T, accepted, phase});
    if (candidate->accuracy > result.best_accuracy) {
      result.best = candidate->arch;
      result.best_accuracy = candidate->accuracy;
      result.best_latency = candidate->latency;
    }
    if (accepted) {
      current = std::move(*candidate);
    } else if (C % config.rejections_per_cool == 0) {
      T = cool(T, config);
      if (T < config.min_temperature) break;
    }
    if (C == phase_switch) {
      active = &weights_by_phase.phase2;
      phase = 2;
    }
  }

  result.evaluations = budget.used;
  return result;
}

}  // namespace fox
