// End-to-end protocol run against the library: synthesize measurements for
// every image size, train the bank, search each size under one latency
// budget, and take the feasible maximum.

#include <cmath>
#include <optional>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "fox/annealer.hpp"
#include "fox/data_io.hpp"
#include "fox/oracle.hpp"
#include "helpers.hpp"

using namespace fox;

TEST_CASE("protocol-scale pipeline across all image sizes", "[integration]") {
  const SearchSpaceSpec cpu = SearchSpaceSpec::cpu_preset();
  const PlantedModel planted = random_planted(cpu, 101, 0.1, 0.5);
  Rng rng(101);
  const SyntheticDataset synth = generate_synthetic(cpu, planted, 300, rng);
  REQUIRE(synth.records.size() == 2100);

  const PredictorBank bank = train_bank(synth.records, cpu);
  for (int size : cpu.image_sizes) REQUIRE(bank.trained_for(size));

  // One budget for all sizes; larger images run slower under the planted
  // latency model, so the per-size optima differ and some sizes may be
  // infeasible outright.
  const double budget_ms = 55.0;
  AnnealConfig config;
  config.max_evaluations = 2000;
  config.seed = 7;

  std::optional<SearchResult> best;
  int feasible_sizes = 0;
  for (int size : cpu.image_sizes) {
    try {
      SearchResult result = search(bank, cpu, budget_ms, config, size);
      ++feasible_sizes;
      CHECK(result.best_latency < budget_ms);
      CHECK(result.best.image_size == size);
      CHECK(validate(result.best, cpu).ok());
      // The search never returns something worse than its own start.
      CHECK(result.best_accuracy >= result.trace.entries.front().accuracy);
      if (!best.has_value() || result.best_accuracy > best->best_accuracy)
        best = std::move(result);
    } catch (const InfeasibleError&) {
      // acceptable for the largest sizes under a tight budget
    }
  }
  REQUIRE(feasible_sizes >= 1);
  REQUIRE(best.has_value());

  // The returned winner agrees with the bank when re-evaluated from scratch.
  const auto [acc, lat] = predict_performance(bank, cpu, best->best);
  CHECK(acc == Catch::Approx(best->best_accuracy).margin(1e-12));
  CHECK(lat == Catch::Approx(best->best_latency).margin(1e-12));

  // When the winner sits within a whisker of the budget, the adjustment
  // machinery can still propose moves against a tighter one.
  const AdjustmentReport rep =
      suggest_adjustment(bank, cpu, best->best, lat - 0.2);
  for (const Adjustment& adj : rep.items) {
    CHECK(adj.latency_delta < 0.0);
    CHECK(adj.latency_p < 0.05);
  }
}

TEST_CASE("malformed numeric fields carry the row number", "[integration]") {
  const SearchSpaceSpec cpu = SearchSpaceSpec::cpu_preset();
  DatasetRecord rec;
  rec.arch = fox::test::uniform_arch(cpu, 224, 2, 3, 2);
  rec.accuracy = 70.0;
  rec.latency_ms = 30.0;
  std::string content = dataset_to_csv({rec, rec}, cpu);
  // Corrupt the accuracy field of the second data row.
  const auto pos = content.rfind("70");
  content.replace(pos, 2, "7x");
  try {
    parse_dataset_csv(content, cpu, "mem");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("row 3") != std::string::npos);
    CHECK(msg.find("7x") != std::string::npos);
  }
}
