#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fox/annealer.hpp"
#include "fox/data_io.hpp"
#include "fox/oracle.hpp"
#include "fox/predictor_bank.hpp"
#include "fox/search_space.hpp"

namespace fox::cli {

// FOX_SEED supplies the default seed; --seed always wins.
inline std::uint64_t default_seed() {
  if (const char* env = std::getenv("FOX_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return 0;
}

inline std::string describe(const Architecture& arch) {
  std::ostringstream os;
  os << "image_size=" << arch.image_size;
  for (std::size_t j = 0; j < arch.units.size(); ++j) {
    const UnitChoice& uc = arch.units[j];
    os << " | u" << (j + 1) << ": d=" << uc.depth << " k=[";
    for (int l = 0; l < uc.depth; ++l) os << (l ? "," : "") << uc.kernels[l];
    os << "] e=[";
    for (int l = 0; l < uc.depth; ++l) os << (l ? "," : "") << uc.expansions[l];
    os << "]";
  }
  return os.str();
}

namespace detail {

struct AnnealFlags {
  AnnealConfig config;
  GuidanceOptions guidance;
  bool unguided = false;
};

inline void add_anneal_flags(CLI::App* cmd, AnnealFlags& flags) {
  cmd->add_option("--t0", flags.config.initial_temperature,
                  "Initial temperature (also the early mutation width)")
      ->capture_default_str();
  cmd->add_option("--boltzmann-k", flags.config.boltzmann_k,
                  "Boltzmann constant in the acceptance rule")
      ->capture_default_str();
  cmd->add_option("--cool-every", flags.config.rejections_per_cool,
                  "Cool when a rejection lands on an iteration multiple of n")
      ->capture_default_str();
  cmd->add_option("--alpha", flags.config.cooling_factor,
                  "Geometric cooling factor")
      ->capture_default_str();
  cmd->add_option("--t-min", flags.config.min_temperature,
                  "Stop once cooling drops below this temperature")
      ->capture_default_str();
  cmd->add_option("--max-evals", flags.config.max_evaluations,
                  "Predictor evaluation budget (0 = until cooled out)")
      ->capture_default_str();
  cmd->add_option("--max-resamples", flags.config.max_feasibility_resamples,
                  "Feasibility resampling cap per step")
      ->capture_default_str();
  cmd->add_option("--phase-switch", flags.config.phase_switch_count,
                  "Iteration at which phase-2 weights take over (0 = 2n)")
      ->capture_default_str();
  cmd->add_flag("--uphill-only-acceptance",
                flags.config.uphill_only_acceptance,
                "Never accept a worse candidate (ablation only)");
  cmd->add_flag("--unguided", flags.unguided,
                "Use uniform weights in both phases");
  cmd->add_option("--guidance-floor", flags.guidance.floor,
                  "Phase-1 weight for slots without significant features")
      ->capture_default_str();
  cmd->add_option("--guidance-cap", flags.guidance.cap,
                  "Upper bound on phase-1 weights")
      ->capture_default_str();
}

inline std::optional<WeightSchedule> schedule_for(const AnnealFlags& flags,
                                                  const PredictorBank& bank,
                                                  const SearchSpaceSpec& spec,
                                                  int image_size) {
  if (flags.unguided) {
    const ParamWeights uniform = ParamWeights::uniform(spec);
    return WeightSchedule{uniform, uniform};
  }
  auto [p1, p2] = guidance_weights(bank, spec, image_size, flags.guidance);
  return WeightSchedule{std::move(p1), std::move(p2)};
}

inline void print_model_table(const PredictorBank& bank,
                              const RegressionModel& model, int image_size) {
  std::cout << model.target_label << " @ image size " << image_size << ": n="
            << model.n << " k=" << model.k
            << " R^2=" << format_double(model.r_squared)
            << " adj R^2=" << format_double(model.adjusted_r_squared) << "\n";
  const std::vector<double> t = t_values(model);
  const std::vector<double> p =
      p_values(t, static_cast<double>(model.degrees_of_freedom()));
  std::printf("  %-18s %12s %12s %9s %9s\n", "coefficient", "beta",
              "std_error", "t", "p");
  for (int i = 0; i < model.k; ++i) {
    const std::string name =
        i == 0 ? std::string("intercept") : bank.feature_names[i - 1];
    std::printf("  %-18s %12.5g %12.5g %9.3f %9.4f%s\n", name.c_str(),
                model.coefficients[i], model.standard_errors[i], t[i], p[i],
                p[i] < 0.05 ? " *" : "");
  }
}

}  // namespace detail

// Dispatches the fox subcommands. Returns the process exit status: 0 on
// success, 1 on any runtime error (one diagnostic line on stderr), 2 on
// usage errors.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"Hardware-aware architecture search with explainable "
               "regression predictors"};
  app.require_subcommand(1);

  // --- gen ------------------------------------------------------------
  auto* gen = app.add_subcommand(
      "gen", "Generate a synthetic measurement dataset from a planted model");
  struct {
    std::string spec = "cpu";
    int per_size = 300;
    double noise_acc = 0.1;
    double noise_lat = 0.5;
    double span = 10.0;
    std::uint64_t seed = default_seed();
    std::string out;
    std::string planted_out;
    std::string features_out;
  } gen_opts;
  gen->add_option("--spec", gen_opts.spec, "cpu, tpu, or a spec JSON file")
      ->capture_default_str();
  gen->add_option("--per-size", gen_opts.per_size,
                  "Records per image size")->capture_default_str();
  gen->add_option("--noise-acc", gen_opts.noise_acc,
                  "Accuracy label noise sigma (%)")->capture_default_str();
  gen->add_option("--noise-lat", gen_opts.noise_lat,
                  "Latency label noise sigma (ms)")->capture_default_str();
  gen->add_option("--span", gen_opts.span,
                  "Accuracy range of the planted landscape (%)")
      ->capture_default_str();
  gen->add_option("--seed", gen_opts.seed, "Random seed (or FOX_SEED)")
      ->capture_default_str();
  gen->add_option("--out", gen_opts.out, "Output dataset CSV")->required();
  gen->add_option("--planted-out", gen_opts.planted_out,
                  "Also write the planted coefficients as JSON");
  gen->add_option("--features-out", gen_opts.features_out,
                  "Also write the feature matrix CSV");

  // --- fit ------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand(
      "fit", "Train per-image-size accuracy and latency predictors");
  struct {
    std::string spec = "cpu";
    std::string data;
    std::string out;
    std::string report;
  } fit_opts;
  fit_cmd->add_option("--spec", fit_opts.spec, "cpu, tpu, or a spec JSON file")
      ->capture_default_str();
  fit_cmd->add_option("--data", fit_opts.data, "Dataset CSV")->required();
  fit_cmd->add_option("--out", fit_opts.out, "Output bank JSON")->required();
  fit_cmd->add_option("--report", fit_opts.report,
                      "Directory for diagnostic CSVs");

  // --- inspect ----------------------------------------------------------
  auto* inspect = app.add_subcommand(
      "inspect", "Print coefficient, t, p and fit statistics of a bank");
  struct {
    std::string spec = "cpu";
    std::string bank;
    int image_size = 0;
  } inspect_opts;
  inspect->add_option("--spec", inspect_opts.spec, "cpu, tpu, or a spec JSON file")
      ->capture_default_str();
  inspect->add_option("--bank", inspect_opts.bank, "Bank JSON")->required();
  inspect->add_option("--image-size", inspect_opts.image_size,
                      "Only this image size (default: all trained)");

  // --- search -----------------------------------------------------------
  auto* search_cmd = app.add_subcommand(
      "search", "Latency-constrained simulated-annealing search");
  struct {
    std::string spec = "cpu";
    std::string bank;
    double latency = 0.0;
    int image_size = 0;
    std::string trace;
    std::string out;
  } search_opts;
  detail::AnnealFlags search_flags;
  search_flags.config.max_evaluations = 10000;
  search_cmd->add_option("--spec", search_opts.spec, "cpu, tpu, or a spec JSON file")
      ->capture_default_str();
  search_cmd->add_option("--bank", search_opts.bank, "Bank JSON")->required();
  search_cmd->add_option("--latency", search_opts.latency,
                         "Latency budget in ms")->required();
  search_cmd->add_option("--image-size", search_opts.image_size,
                         "Search only this image size (default: all trained)");
  search_cmd->add_option("--seed", search_flags.config.seed,
                         "Random seed (or FOX_SEED)")
      ->default_val(default_seed());
  search_cmd->add_option("--trace", search_opts.trace, "Write the search trace CSV");
  search_cmd->add_option("--out", search_opts.out,
                         "Write the best architecture JSON");
  detail::add_anneal_flags(search_cmd, search_flags);

  // --- brute ------------------------------------------------------------
  auto* brute = app.add_subcommand(
      "brute", "Exhaustive oracle search over an enumerable space");
  struct {
    std::string spec = "cpu";
    std::string bank;
    double latency = 0.0;
    int image_size = 0;
    std::uint64_t cap = 1000000;
  } brute_opts;
  brute->add_option("--spec", brute_opts.spec, "cpu, tpu, or a spec JSON file")
      ->capture_default_str();
  brute->add_option("--bank", brute_opts.bank, "Bank JSON")->required();
  brute->add_option("--latency", brute_opts.latency, "Latency budget in ms")
      ->required();
  brute->add_option("--image-size", brute_opts.image_size, "Image size")
      ->required();
  brute->add_option("--cap", brute_opts.cap, "Enumeration cap")
      ->capture_default_str();

  // --- adjust -----------------------------------------------------------
  auto* adjust = app.add_subcommand(
      "adjust", "Suggest single-step parameter changes to meet a budget");
  struct {
    std::string spec = "cpu";
    std::string bank;
    std::string arch;
    double latency = 0.0;
    double significance = 0.05;
    std::string out;
  } adjust_opts;
  adjust->add_option("--spec", adjust_opts.spec, "cpu, tpu, or a spec JSON file")
      ->capture_default_str();
  adjust->add_option("--bank", adjust_opts.bank, "Bank JSON")->required();
  adjust->add_option("--arch", adjust_opts.arch, "Architecture JSON")->required();
  adjust->add_option("--latency", adjust_opts.latency, "Latency budget in ms")
      ->required();
  adjust->add_option("--significance", adjust_opts.significance,
                     "p-value gate for latency features")
      ->capture_default_str();
  adjust->add_option("--out", adjust_opts.out, "Write suggestions CSV");

  // --- compare ----------------------------------------------------------
  auto* compare = app.add_subcommand(
      "compare", "Guided vs uniform-weight A/B search, two trace files");
  struct {
    std::string spec = "cpu";
    std::string bank;
    double latency = 0.0;
    int image_size = 0;
    std::string trace_guided;
    std::string trace_uniform;
  } compare_opts;
  detail::AnnealFlags compare_flags;
  compare_flags.config.max_evaluations = 10000;
  compare->add_option("--spec", compare_opts.spec, "cpu, tpu, or a spec JSON file")
      ->capture_default_str();
  compare->add_option("--bank", compare_opts.bank, "Bank JSON")->required();
  compare->add_option("--latency", compare_opts.latency, "Latency budget in ms")
      ->required();
  compare->add_option("--image-size", compare_opts.image_size, "Image size")
      ->required();
  compare->add_option("--seed", compare_flags.config.seed,
                      "Random seed (or FOX_SEED)")
      ->default_val(default_seed());
  compare->add_option("--trace-guided", compare_opts.trace_guided,
                      "Guided trace CSV")->required();
  compare->add_option("--trace-uniform", compare_opts.trace_uniform,
                      "Uniform trace CSV")->required();
  detail::add_anneal_flags(compare, compare_flags);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (gen->parsed()) {
      const SearchSpaceSpec spec = resolve_spec(gen_opts.spec);
      PlantedModel planted = random_planted(spec, gen_opts.seed,
                                            gen_opts.noise_acc,
                                            gen_opts.noise_lat, gen_opts.span);
      // Data stream derived from the seed, separate from the coefficients.
      Rng rng(gen_opts.seed * 0x9e3779b97f4a7c15ULL + 1);
      const SyntheticDataset synth =
          generate_synthetic(spec, planted, gen_opts.per_size, rng);
      save_dataset(gen_opts.out, synth.records, spec);
      if (!gen_opts.planted_out.empty()) {
        nlohmann::json j;
        j["seed"] = planted.seed;
        j["noise_accuracy"] = planted.noise_accuracy;
        j["noise_latency"] = planted.noise_latency;
        for (const auto& [size, coeffs] : planted.accuracy_coefficients)
          j["accuracy_coefficients"][std::to_string(size)] = coeffs;
        for (const auto& [size, coeffs] : planted.latency_coefficients)
          j["latency_coefficients"][std::to_string(size)] = coeffs;
        atomic_write_file(gen_opts.planted_out, j.dump(2) + "\n");
      }
      if (!gen_opts.features_out.empty())
        atomic_write_file(gen_opts.features_out,
                          feature_matrix_csv(synth.records, spec));
      std::cout << "wrote " << synth.records.size() << " records to "
                << gen_opts.out << "\n";
      if (synth.accuracy_clamps > 0 || synth.latency_clamps > 0)
        std::cerr << "clamped " << synth.accuracy_clamps << " accuracy and "
                  << synth.latency_clamps << " latency labels\n";
      return 0;
    }

    if (fit_cmd->parsed()) {
      const SearchSpaceSpec spec = resolve_spec(fit_opts.spec);
      const std::vector<DatasetRecord> records =
          load_dataset(fit_opts.data, spec);
      const PredictorBank bank = train_bank(records, spec);
      save_bank(fit_opts.out, bank);
      if (!fit_opts.report.empty()) write_reports(fit_opts.report, bank);
      for (const auto& [size, pair] : bank.models) {
        if (!pair.has_value()) {
          std::cout << "image size " << size << ": untrained (no records)\n";
          continue;
        }
        std::cout << "image size " << size << ": accuracy adj R^2 = "
                  << format_double(pair->accuracy.adjusted_r_squared)
                  << ", latency adj R^2 = "
                  << format_double(pair->latency.adjusted_r_squared) << " (n="
                  << pair->accuracy.n << ")\n";
      }
      std::cout << "bank written to " << fit_opts.out << "\n";
      return 0;
    }

    if (inspect->parsed()) {
      const SearchSpaceSpec spec = resolve_spec(inspect_opts.spec);
      const PredictorBank bank = load_bank(inspect_opts.bank, spec);
      for (const auto& [size, pair] : bank.models) {
        if (!pair.has_value()) continue;
        if (inspect_opts.image_size != 0 && size != inspect_opts.image_size)
          continue;
        detail::print_model_table(bank, pair->accuracy, size);
        detail::print_model_table(bank, pair->latency, size);
      }
      return 0;
    }

    if (search_cmd->parsed()) {
      const SearchSpaceSpec spec = resolve_spec(search_opts.spec);
      const PredictorBank bank = load_bank(search_opts.bank, spec);
      std::vector<int> sizes;
      if (search_opts.image_size != 0) {
        sizes.push_back(search_opts.image_size);
      } else {
        for (int size : spec.image_sizes)
          if (bank.trained_for(size)) sizes.push_back(size);
        if (sizes.empty()) throw Error("bank has no trained image sizes");
      }
      std::optional<SearchResult> best;
      for (int size : sizes) {
        const auto schedule =
            detail::schedule_for(search_flags, bank, spec, size);
        try {
          SearchResult result = search(bank, spec, search_opts.latency,
                                       search_flags.config, size, schedule);
          std::cout << "image size " << size << ": best predicted accuracy "
                    << format_double(result.best_accuracy) << "% at "
                    << format_double(result.best_latency) << " ms ("
                    << result.evaluations << " evaluations)\n";
          if (!best.has_value() || result.best_accuracy > best->best_accuracy)
            best = std::move(result);
        } catch (const InfeasibleError& e) {
          std::cout << "image size " << size << ": infeasible (" << e.what()
                    << ")\n";
        }
      }
      if (!best.has_value())
        throw InfeasibleError("no image size admits the latency budget " +
                                  format_double(search_opts.latency) + " ms",
                              0.0);
      std::cout << "best: " << describe(best->best) << "\n";
      std::cout << "predicted accuracy " << format_double(best->best_accuracy)
                << "%, predicted latency " << format_double(best->best_latency)
                << " ms\n";
      if (!search_opts.trace.empty()) save_trace(search_opts.trace, best->trace);
      if (!search_opts.out.empty()) save_architecture(search_opts.out, best->best);
      return 0;
    }

    if (brute->parsed()) {
      const SearchSpaceSpec spec = resolve_spec(brute_opts.spec);
      const PredictorBank bank = load_bank(brute_opts.bank, spec);
      const BruteForceResult result =
          brute_force_search(bank, spec, brute_opts.latency,
                             brute_opts.image_size, brute_opts.cap);
      if (!result.feasible) {
        std::cout << "constraint infeasible: no architecture at image size "
                  << brute_opts.image_size << " stays under "
                  << format_double(brute_opts.latency) << " ms ("
                  << result.evaluated << " evaluated)\n";
        return 0;
      }
      std::cout << "best: " << describe(result.best) << "\n";
      std::cout << "predicted accuracy " << format_double(result.accuracy)
                << "%, predicted latency " << format_double(result.latency)
                << " ms (" << result.evaluated << " evaluated)\n";
      return 0;
    }

    if (adjust->parsed()) {
      const SearchSpaceSpec spec = resolve_spec(adjust_opts.spec);
      const PredictorBank bank = load_bank(adjust_opts.bank, spec);
      const Architecture arch = load_architecture(adjust_opts.arch, spec);
      const auto [acc, lat] = predict_performance(bank, spec, arch);
      std::cout << "architecture: " << describe(arch) << "\n";
      std::cout << "predicted accuracy " << format_double(acc)
                << "%, predicted latency " << format_double(lat)
                << " ms, budget " << format_double(adjust_opts.latency)
                << " ms\n";
      const AdjustmentReport report = suggest_adjustment(
          bank, spec, arch, adjust_opts.latency, adjust_opts.significance);
      if (report.items.empty() && report.sufficient) {
        std::cout << "already within budget; nothing to adjust\n";
        return 0;
      }
      std::ostringstream csv;
      csv << "rank,slot,from,to,delta_steps,latency_delta_ms,"
             "accuracy_delta,latency_p,accuracy_p\n";
      std::printf("  %-10s %4s %4s %14s %14s %10s %10s\n", "slot", "from",
                  "to", "d_latency(ms)", "d_accuracy(%)", "p_lat", "p_acc");
      int rank = 0;
      for (const Adjustment& adj : report.items) {
        ++rank;
        std::printf("  %-10s %4d %4d %14.4f %14.4f %10.2g %10.2g\n",
                    adj.slot.c_str(), adj.from_value, adj.to_value,
                    adj.latency_delta, adj.accuracy_delta, adj.latency_p,
                    adj.accuracy_p);
        csv << rank << "," << adj.slot << "," << adj.from_value << ","
            << adj.to_value << "," << adj.delta_steps << ","
            << format_double(adj.latency_delta) << ","
            << format_double(adj.accuracy_delta) << ","
            << format_double(adj.latency_p) << ","
            << format_double(adj.accuracy_p) << "\n";
      }
      if (!report.sufficient)
        std::cout << "insufficient single-step moves: no suggested change "
                     "closes the gap on its own\n";
      if (!adjust_opts.out.empty()) atomic_write_file(adjust_opts.out, csv.str());
      return 0;
    }

    if (compare->parsed()) {
      const SearchSpaceSpec spec = resolve_spec(compare_opts.spec);
      const PredictorBank bank = load_bank(compare_opts.bank, spec);
      const int size = compare_opts.image_size;
      const ParamWeights uniform = ParamWeights::uniform(spec);
      auto [p1, p2] = guidance_weights(bank, spec, size, compare_flags.guidance);

      const SearchResult guided =
          search(bank, spec, compare_opts.latency, compare_flags.config, size,
                 WeightSchedule{p1, p2});
      const SearchResult unguided =
          search(bank, spec, compare_opts.latency, compare_flags.config, size,
                 WeightSchedule{uniform, uniform});
      save_trace(compare_opts.trace_guided, guided.trace);
      save_trace(compare_opts.trace_uniform, unguided.trace);

      auto evals_to_best = [](const SearchResult& r) {
        for (const TraceEntry& e : r.trace.entries)
          if (e.accuracy >= r.best_accuracy) return e.evaluations;
        return r.evaluations;
      };
      std::cout << "guided:  best " << format_double(guided.best_accuracy)
                << "% after " << evals_to_best(guided) << " of "
                << guided.evaluations << " evaluations\n";
      std::cout << "uniform: best " << format_double(unguided.best_accuracy)
                << "% after " << evals_to_best(unguided) << " of "
                << unguided.evaluations << " evaluations\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fox::cli
