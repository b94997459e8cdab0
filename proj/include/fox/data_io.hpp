#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fox/annealer.hpp"
#include "fox/dataset.hpp"
#include "fox/errors.hpp"
#include "fox/oracle.hpp"
#include "fox/predictor_bank.hpp"
#include "fox/search_space.hpp"

namespace fox {

// ---------------------------------------------------------------------------
// Formatting and file primitives
//
// All numeric output uses %.17g so doubles survive a write/read round trip
// bit-exactly and identical runs produce identical bytes.

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw IoError(where + ": not a number: '" + s + "'");
  return v;
}

inline int parse_int(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw IoError(where + ": not an integer: '" + s + "'");
  return static_cast<int>(v);
}

// Write-temp-then-rename so readers never observe a partial file.
inline void atomic_write_file(const std::string& path,
                              const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw IoError("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + " -> " + path + ": " + ec.message());
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (quoted) {
      if (c == '"') quoted = false;
      else field.push_back(c);
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find(',') == std::string::npos && s.find('"') == std::string::npos)
    return s;
  return "\"" + s + "\"";
}

// ---------------------------------------------------------------------------
// Dataset CSV
//
// One row per record in raw slot order:
//   image_size, then per unit j: u{j}_depth, then per layer l:
//   u{j}_l{l}_k, u{j}_l{l}_e; finally accuracy, latency_ms.
// Inactive slots are stored like active ones and ignored by the features.

inline std::vector<std::string> dataset_columns(const SearchSpaceSpec& spec) {
  std::vector<std::string> cols;
  for (int s = 0; s < slot_count(spec); ++s) cols.push_back(slot_name(spec, s));
  cols.push_back("accuracy");
  cols.push_back("latency_ms");
  return cols;
}

inline std::string dataset_to_csv(const std::vector<DatasetRecord>& records,
                                  const SearchSpaceSpec& spec) {
  std::ostringstream os;
  const std::vector<std::string> cols = dataset_columns(spec);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const DatasetRecord& rec : records) {
    for (int s = 0; s < slot_count(spec); ++s)
      os << (s ? "," : "") << get_slot(rec.arch, spec, s);
    os << "," << format_double(rec.accuracy) << ","
       << format_double(rec.latency_ms) << "\n";
  }
  return os.str();
}

inline void save_dataset(const std::string& path,
                         const std::vector<DatasetRecord>& records,
                         const SearchSpaceSpec& spec) {
  atomic_write_file(path, dataset_to_csv(records, spec));
}

inline std::vector<DatasetRecord> parse_dataset_csv(
    const std::string& content, const SearchSpaceSpec& spec,
    const std::string& origin) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line))
    throw IoError(origin + ": empty file, expected a header row");
  const std::vector<std::string> header = split_csv_line(line);
  const std::vector<std::string> expected = dataset_columns(spec);
  for (const std::string& col : expected)
    if (std::find(header.begin(), header.end(), col) == header.end())
      throw IoError(origin + ": missing column '" + col + "'");
  for (const std::string& col : header)
    if (std::find(expected.begin(), expected.end(), col) == expected.end())
      throw IoError(origin + ": unexpected column '" + col + "'");
  if (header != expected)
    throw IoError(origin + ": columns are out of order");

  // Architecture skeleton sized for this spec.
  Architecture skeleton;
  skeleton.units.resize(spec.units.size());
  for (int j = 0; j < spec.unit_count(); ++j) {
    skeleton.units[j].kernels.resize(spec.units[j].max_depth());
    skeleton.units[j].expansions.resize(spec.units[j].max_depth());
  }

  std::vector<DatasetRecord> records;
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    const std::string at = origin + ": row " + std::to_string(row);
    if (fields.size() != expected.size())
      throw IoError(at + ": expected " + std::to_string(expected.size()) +
                    " fields, got " + std::to_string(fields.size()));
    DatasetRecord rec;
    rec.arch = skeleton;
    for (int s = 0; s < slot_count(spec); ++s)
      set_slot(rec.arch, spec, s, parse_int(fields[s], at));
    rec.accuracy = parse_double(fields[slot_count(spec)], at);
    rec.latency_ms = parse_double(fields[slot_count(spec) + 1], at);

    const Validity v = validate(rec.arch, spec);
    if (!v.ok()) throw IoError(at + ": " + v.violations[0]);
    if (!(rec.accuracy >= 0.0 && rec.accuracy <= 100.0))
      throw IoError(at + ": accuracy " + format_double(rec.accuracy) +
                    " outside [0, 100]");
    if (!(rec.latency_ms > 0.0))
      throw IoError(at + ": latency_ms must be positive, got " +
                    format_double(rec.latency_ms));
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::vector<DatasetRecord> load_dataset(const std::string& path,
                                               const SearchSpaceSpec& spec) {
  return parse_dataset_csv(read_file(path), spec, path);
}

// ---------------------------------------------------------------------------
// Synthetic data generation

struct SyntheticDataset {
  std::vector<DatasetRecord> records;
  long accuracy_clamps = 0;  // labels pushed back into [0, 100]
  long latency_clamps = 0;   // labels floored at 0.01 ms
};

// Uniform-samples `count_per_image_size` architectures per image size (spec
// order) and labels each with the planted truth plus Gaussian noise at the
// planted sigmas. Accuracy clamps to [0, 100], latency floors at 0.01 ms;
// clamps are counted for the caller to log.
inline SyntheticDataset generate_synthetic(const SearchSpaceSpec& spec,
                                           const PlantedModel& planted,
                                           int count_per_image_size, Rng& rng) {
  if (count_per_image_size < 1)
    throw InvalidInput("generate_synthetic: count_per_image_size must be >= 1");
  check_planted(planted, spec);
  SyntheticDataset out;
  out.records.reserve(spec.image_sizes.size() *
                      static_cast<std::size_t>(count_per_image_size));
  for (int size : spec.image_sizes) {
    for (int i = 0; i < count_per_image_size; ++i) {
      DatasetRecord rec;
      rec.arch = sample_uniform_at(spec, size, rng);
      const auto [acc, lat] = evaluate_true(planted, spec, rec.arch);
      rec.accuracy = acc + (planted.noise_accuracy > 0.0
                                ? rng.normal(0.0, planted.noise_accuracy)
                                : 0.0);
      rec.latency_ms = lat + (planted.noise_latency > 0.0
                                  ? rng.normal(0.0, planted.noise_latency)
                                  : 0.0);
      if (rec.accuracy < 0.0 || rec.accuracy > 100.0) {
        rec.accuracy = std::min(100.0, std::max(0.0, rec.accuracy));
        ++out.accuracy_clamps;
      }
      if (rec.latency_ms < 0.01) {
        rec.latency_ms = 0.01;
        ++out.latency_clamps;
      }
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Search-space spec files (declarative JSON mirroring the candidate tables)

inline nlohmann::json spec_to_json(const SearchSpaceSpec& spec) {
  nlohmann::json j;
  j["name"] = spec.name;
  j["image_sizes"] = spec.image_sizes;
  j["units"] = nlohmann::json::array();
  for (const UnitSpec& u : spec.units) {
    nlohmann::json ju;
    ju["kernels"] = u.kernel_candidates;
    ju["expansions"] = u.expansion_candidates;
    ju["depths"] = u.depth_candidates;
    ju["type"] = static_cast<int>(u.unit_type);
    j["units"].push_back(std::move(ju));
  }
  return j;
}

inline SearchSpaceSpec spec_from_json(const nlohmann::json& j) {
  SearchSpaceSpec spec;
  try {
    spec.name = j.at("name").get<std::string>();
    spec.image_sizes = j.at("image_sizes").get<std::vector<int>>();
    for (const nlohmann::json& ju : j.at("units")) {
      UnitSpec u;
      u.kernel_candidates = ju.at("kernels").get<std::vector<int>>();
      u.expansion_candidates = ju.at("expansions").get<std::vector<int>>();
      u.depth_candidates = ju.at("depths").get<std::vector<int>>();
      u.unit_type = static_cast<UnitType>(ju.value("type", 1));
      spec.units.push_back(std::move(u));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("spec json: ") + e.what());
  }
  check_spec(spec);
  return spec;
}

inline void save_spec(const std::string& path, const SearchSpaceSpec& spec) {
  atomic_write_file(path, spec_to_json(spec).dump(2) + "\n");
}

inline SearchSpaceSpec load_spec(const std::string& path) {
  try {
    return spec_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

// "cpu" and "tpu" are built in; anything else is a spec file path.
inline SearchSpaceSpec resolve_spec(const std::string& name_or_path) {
  if (name_or_path == "cpu") return SearchSpaceSpec::cpu_preset();
  if (name_or_path == "tpu") return SearchSpaceSpec::tpu_preset();
  return load_spec(name_or_path);
}

// ---------------------------------------------------------------------------
// Predictor bank JSON

namespace detail {

inline nlohmann::json model_to_json(const RegressionModel& m) {
  nlohmann::json j;
  j["coefficients"] = m.coefficients;
  j["standard_errors"] = m.standard_errors;
  j["n"] = m.n;
  j["k"] = m.k;
  j["r_squared"] = m.r_squared;
  j["adjusted_r_squared"] = m.adjusted_r_squared;
  j["sse"] = m.sse;
  j["tss"] = m.tss;
  j["degenerate_target"] = m.degenerate_target;
  j["target"] = m.target_label;
  return j;
}

inline RegressionModel model_from_json(const nlohmann::json& j) {
  RegressionModel m;
  m.coefficients = j.at("coefficients").get<std::vector<double>>();
  m.standard_errors = j.at("standard_errors").get<std::vector<double>>();
  m.n = j.at("n").get<long>();
  m.k = j.at("k").get<int>();
  m.r_squared = j.at("r_squared").get<double>();
  m.adjusted_r_squared = j.at("adjusted_r_squared").get<double>();
  m.sse = j.at("sse").get<double>();
  m.tss = j.at("tss").get<double>();
  m.degenerate_target = j.at("degenerate_target").get<bool>();
  m.target_label = j.at("target").get<std::string>();
  return m;
}

}  // namespace detail

// The persisted form carries the models and fit statistics; per-sample
// diagnostics are report artifacts and are not serialized.
inline nlohmann::json bank_to_json(const PredictorBank& bank) {
  nlohmann::json j;
  j["format"] = "fox-bank-v1";
  j["spec_fingerprint"] = bank.spec_fingerprint;
  j["spec_name"] = bank.spec_name;
  j["feature_names"] = bank.feature_names;
  j["models"] = nlohmann::json::array();
  for (const auto& [size, pair] : bank.models) {
    nlohmann::json jm;
    jm["image_size"] = size;
    jm["trained"] = pair.has_value();
    if (pair.has_value()) {
      jm["accuracy"] = detail::model_to_json(pair->accuracy);
      jm["latency"] = detail::model_to_json(pair->latency);
    }
    j["models"].push_back(std::move(jm));
  }
  return j;
}

inline PredictorBank bank_from_json(const nlohmann::json& j,
                                    const SearchSpaceSpec& spec) {
  try {
    if (j.at("format").get<std::string>() != "fox-bank-v1")
      throw IoError("bank json: unknown format tag");
    const std::string fingerprint = j.at("spec_fingerprint").get<std::string>();
    if (fingerprint != spec_fingerprint(spec))
      throw IoError("bank json: spec fingerprint " + fingerprint +
                    " does not match spec '" + spec.name + "' (" +
                    spec_fingerprint(spec) +
                    "); the bank was trained for a different search space");
    PredictorBank bank;
    bank.spec_fingerprint = fingerprint;
    bank.spec_name = j.at("spec_name").get<std::string>();
    bank.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    for (int size : spec.image_sizes) bank.models[size] = std::nullopt;
    for (const nlohmann::json& jm : j.at("models")) {
      const int size = jm.at("image_size").get<int>();
      if (!jm.at("trained").get<bool>()) continue;
      TrainedPair pair;
      pair.accuracy = detail::model_from_json(jm.at("accuracy"));
      pair.latency = detail::model_from_json(jm.at("latency"));
      bank.models[size] = std::move(pair);
    }
    return bank;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bank json: ") + e.what());
  }
}

inline void save_bank(const std::string& path, const PredictorBank& bank) {
  atomic_write_file(path, bank_to_json(bank).dump(2) + "\n");
}

inline PredictorBank load_bank(const std::string& path,
                               const SearchSpaceSpec& spec) {
  try {
    return bank_from_json(nlohmann::json::parse(read_file(path)), spec);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Architecture JSON (search output, adjust input)

inline nlohmann::json arch_to_json(const Architecture& arch) {
  nlohmann::json j;
  j["image_size"] = arch.image_size;
  j["units"] = nlohmann::json::array();
  for (const UnitChoice& uc : arch.units) {
    nlohmann::json ju;
    ju["depth"] = uc.depth;
    ju["kernels"] = uc.kernels;
    ju["expansions"] = uc.expansions;
    j["units"].push_back(std::move(ju));
  }
  return j;
}

inline Architecture arch_from_json(const nlohmann::json& j) {
  Architecture arch;
  try {
    arch.image_size = j.at("image_size").get<int>();
    for (const nlohmann::json& ju : j.at("units")) {
      UnitChoice uc;
      uc.depth = ju.at("depth").get<int>();
      uc.kernels = ju.at("kernels").get<std::vector<int>>();
      uc.expansions = ju.at("expansions").get<std::vector<int>>();
      arch.units.push_back(std::move(uc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("architecture json: ") + e.what());
  }
  return arch;
}

inline void save_architecture(const std::string& path, const Architecture& arch) {
  atomic_write_file(path, arch_to_json(arch).dump(2) + "\n");
}

inline Architecture load_architecture(const std::string& path,
                                      const SearchSpaceSpec& spec) {
  Architecture arch;
  try {
    arch = arch_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  const Validity v = validate(arch, spec);
  if (!v.ok()) throw IoError(path + ": " + v.violations[0]);
  return arch;
}

// ---------------------------------------------------------------------------
// Trace CSV (the data behind a convergence plot)

inline std::string trace_to_csv(const SearchTrace& trace) {
  std::ostringstream os;
  os << "iteration,evaluations,predicted_accuracy,predicted_latency,"
        "temperature,accepted,phase\n";
  for (const TraceEntry& e : trace.entries) {
    os << e.iteration << "," << e.evaluations << ","
       << format_double(e.accuracy) << "," << format_double(e.latency) << ","
       << format_double(e.temperature) << "," << (e.accepted ? 1 : 0) << ","
       << e.phase << "\n";
  }
  return os.str();
}

inline void save_trace(const std::string& path, const SearchTrace& trace) {
  atomic_write_file(path, trace_to_csv(trace));
}

// ---------------------------------------------------------------------------
// Report CSVs (coefficient tables and plot data)

inline std::string coefficient_table_csv(const PredictorBank& bank,
                                         const RegressionModel& model) {
  const std::vector<double> t = t_values(model);
  const std::vector<double> p =
      p_values(t, static_cast<double>(model.degrees_of_freedom()));
  std::ostringstream os;
  os << "coefficient,beta,standard_error,t,p\n";
  for (int i = 0; i < model.k; ++i) {
    const std::string name =
        i == 0 ? std::string("intercept") : bank.feature_names[i - 1];
    os << csv_quote(name) << "," << format_double(model.coefficients[i]) << ","
       << format_double(model.standard_errors[i]) << "," << format_double(t[i])
       << "," << format_double(p[i]) << "\n";
  }
  return os.str();
}

inline std::string residual_plot_csv(const FitDiagnostics& diag) {
  std::ostringstream os;
  os << "fitted,residual\n";
  for (std::size_t i = 0; i < diag.fitted.size(); ++i)
    os << format_double(diag.fitted[i]) << ","
       << format_double(diag.residuals[i]) << "\n";
  return os.str();
}

inline std::string qq_plot_csv(const FitDiagnostics& diag) {
  std::ostringstream os;
  os << "theoretical_quantile,sample_quantile\n";
  for (const auto& [theo, sample] : diag.qq_pairs)
    os << format_double(theo) << "," << format_double(sample) << "\n";
  return os.str();
}

// Writes per-model diagnostics under `dir`:
//   {target}_{size}_coefficients.csv, {target}_{size}_residuals.csv,
//   {target}_{size}_qq.csv, plus a summary.csv of fit statistics.
inline void write_reports(const std::string& dir, const PredictorBank& bank) {
  std::filesystem::create_directories(dir);
  std::ostringstream summary;
  summary << "image_size,target,n,k,r_squared,adjusted_r_squared\n";
  for (const auto& [size, pair] : bank.models) {
    if (!pair.has_value()) continue;
    const std::string base = dir + "/";
    struct Entry {
      const char* prefix;
      const RegressionModel& model;
      const FitDiagnostics& diag;
    };
    const Entry entries[] = {
        {"accuracy", pair->accuracy, pair->accuracy_diag},
        {"latency", pair->latency, pair->latency_diag},
    };
    for (const Entry& e : entries) {
      const std::string stem = base + e.prefix + "_" + std::to_string(size);
      atomic_write_file(stem + "_coefficients.csv",
                        coefficient_table_csv(bank, e.model));
      if (!e.diag.fitted.empty()) {
        atomic_write_file(stem + "_residuals.csv", residual_plot_csv(e.diag));
        atomic_write_file(stem + "_qq.csv", qq_plot_csv(e.diag));
      }
      summary << size << "," << e.prefix << "," << e.model.n << ","
              << e.model.k << "," << format_double(e.model.r_squared) << ","
              << format_double(e.model.adjusted_r_squared) << "\n";
    }
  }
  atomic_write_file(dir + "/summary.csv", summary.str());
}

// ---------------------------------------------------------------------------
// Feature matrix CSV (for external statistical cross-checks)

inline std::string feature_matrix_csv(const std::vector<DatasetRecord>& records,
                                      const SearchSpaceSpec& spec) {
  const std::vector<std::string> names = feature_names(spec);
  std::ostringstream os;
  os << "image_size";
  for (const std::string& name : names) os << "," << csv_quote(name);
  os << ",accuracy,latency_ms\n";
  for (const DatasetRecord& rec : records) {
    os << rec.arch.image_size;
    const FeatureVector fv = featurize(rec.arch, spec);
    for (double v : fv.values) os << "," << format_double(v);
    os << "," << format_double(rec.accuracy) << ","
       << format_double(rec.latency_ms) << "\n";
  }
  return os.str();
}

}  // namespace fox
