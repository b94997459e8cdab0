#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "fox/errors.hpp"
#include "fox/rng.hpp"

namespace fox {

using BigInt = boost::multiprecision::cpp_int;

// Symbolic unit flavor; carried as metadata only, never used in features.
enum class UnitType { type1 = 1, type2 = 2, type3 = 3 };

struct UnitSpec {
  std::vector<int> kernel_candidates;     // odd positive, sorted ascending
  std::vector<int> expansion_candidates;  // positive, sorted ascending
  std::vector<int> depth_candidates;      // positive, sorted ascending
  UnitType unit_type = UnitType::type1;

  int max_depth() const { return depth_candidates.back(); }
};

struct SearchSpaceSpec {
  std::string name;
  std::vector<int> image_sizes;  // strictly increasing
  std::vector<UnitSpec> units;   // length m >= 1

  int unit_count() const { return static_cast<int>(units.size()); }

  static SearchSpaceSpec cpu_preset();
  static SearchSpaceSpec tpu_preset();
};

struct UnitChoice {
  int depth = 0;
  std::vector<int> kernels;     // length max_depth; entries < depth are active
  std::vector<int> expansions;  // length max_depth

  bool operator==(const UnitChoice&) const = default;
};

struct Architecture {
  int image_size = 0;
  std::vector<UnitChoice> units;

  bool operator==(const Architecture&) const = default;
};

// ---------------------------------------------------------------------------
// Spec construction and well-formedness

inline void check_spec(const SearchSpaceSpec& spec) {
  auto sorted_unique_positive = [](const std::vector<int>& v) {
    if (v.empty()) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= 0) return false;
      if (i > 0 && v[i] <= v[i - 1]) return false;
    }
    return true;
  };
  if (spec.units.empty()) throw InvalidInput("spec: needs at least one unit");
  if (!sorted_unique_positive(spec.image_sizes))
    throw InvalidInput("spec: image_sizes must be non-empty and strictly increasing");
  for (std::size_t j = 0; j < spec.units.size(); ++j) {
    const UnitSpec& u = spec.units[j];
    const std::string at = "spec: unit " + std::to_string(j + 1);
    if (!sorted_unique_positive(u.kernel_candidates))
      throw InvalidInput(at + ": kernel candidates must be non-empty, positive, ascending");
    for (int k : u.kernel_candidates)
      if (k % 2 == 0) throw InvalidInput(at + ": kernel candidates must be odd");
    if (!sorted_unique_positive(u.expansion_candidates))
      throw InvalidInput(at + ": expansion candidates must be non-empty, positive, ascending");
    if (!sorted_unique_positive(u.depth_candidates))
      throw InvalidInput(at + ": depth candidates must be non-empty, positive, ascending");
  }
}

inline SearchSpaceSpec SearchSpaceSpec::cpu_preset() {
  SearchSpaceSpec spec;
  spec.name = "cpu";
  spec.image_sizes = {128, 160, 192, 224, 256, 288, 320};
  UnitSpec unit;
  unit.kernel_candidates = {3, 5, 7};
  unit.expansion_candidates = {2, 3, 4, 6};
  unit.depth_candidates = {2, 3, 4};
  for (int j = 0; j < 5; ++j) {
    unit.unit_type = (j < 3) ? UnitType::type1 : UnitType::type2;
    spec.units.push_back(unit);
  }
  return spec;
}

inline SearchSpaceSpec SearchSpaceSpec::tpu_preset() {
  SearchSpaceSpec spec;
  spec.name = "tpu";
  spec.image_sizes = {128, 160, 192, 224, 256, 288, 320};
  UnitSpec unit;
  unit.kernel_candidates = {3};
  unit.expansion_candidates = {4, 6, 8};
  unit.depth_candidates = {3, 4, 5};
  for (int j = 0; j < 5; ++j) {
    unit.unit_type = (j < 3) ? UnitType::type2 : UnitType::type3;
    spec.units.push_back(unit);
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Slot addressing
//
// Every mutable parameter of an Architecture is a "slot". Fixed order:
//   slot 0: image size
//   then per unit j: depth, then per layer l: kernel(j,l), expansion(j,l).
// The order matches the dataset CSV columns.

struct SlotRef {
  enum class Kind { image_size, depth, kernel, expansion };
  Kind kind = Kind::image_size;
  int unit = -1;   // 0-based
  int layer = -1;  // 0-based
};

inline int slot_count(const SearchSpaceSpec& spec) {
  int n = 1;
  for (const UnitSpec& u : spec.units) n += 1 + 2 * u.max_depth();
  return n;
}

inline SlotRef slot_at(const SearchSpaceSpec& spec, int index) {
  if (index == 0) return SlotRef{SlotRef::Kind::image_size, -1, -1};
  int pos = index - 1;
  for (int j = 0; j < spec.unit_count(); ++j) {
    const int unit_slots = 1 + 2 * spec.units[j].max_depth();
    if (pos < unit_slots) {
      if (pos == 0) return SlotRef{SlotRef::Kind::depth, j, -1};
      const int layer = (pos - 1) / 2;
      const bool is_kernel = ((pos - 1) % 2) == 0;
      return SlotRef{is_kernel ? SlotRef::Kind::kernel : SlotRef::Kind::expansion,
                     j, layer};
    }
    pos -= unit_slots;
  }
  throw InvalidInput("slot_at: index " + std::to_string(index) + " out of range");
}

inline std::string slot_name(const SearchSpaceSpec& spec, int index) {
  const SlotRef ref = slot_at(spec, index);
  switch (ref.kind) {
    case SlotRef::Kind::image_size:
      return "image_size";
    case SlotRef::Kind::depth:
      return "u" + std::to_string(ref.unit + 1) + "_depth";
    case SlotRef::Kind::kernel:
      return "u" + std::to_string(ref.unit + 1) + "_l" +
             std::to_string(ref.layer + 1) + "_k";
    case SlotRef::Kind::expansion:
      return "u" + std::to_string(ref.unit + 1) + "_l" +
             std::to_string(ref.layer + 1) + "_e";
  }
  return {};
}

inline const std::vector<int>& slot_candidates(const SearchSpaceSpec& spec,
                                               int index) {
  const SlotRef ref = slot_at(spec, index);
  switch (ref.kind) {
    case SlotRef::Kind::image_size:
      return spec.image_sizes;
    case SlotRef::Kind::depth:
      return spec.units[ref.unit].depth_candidates;
    case SlotRef::Kind::kernel:
      return spec.units[ref.unit].kernel_candidates;
    default:
      return spec.units[ref.unit].expansion_candidates;
  }
}

inline int get_slot(const Architecture& arch, const SearchSpaceSpec& spec,
                    int index) {
  const SlotRef ref = slot_at(spec, index);
  switch (ref.kind) {
    case SlotRef::Kind::image_size:
      return arch.image_size;
    case SlotRef::Kind::depth:
      return arch.units[ref.unit].depth;
    case SlotRef::Kind::kernel:
      return arch.units[ref.unit].kernels[ref.layer];
    default:
      return arch.units[ref.unit].expansions[ref.layer];
  }
}

inline void set_slot(Architecture& arch, const SearchSpaceSpec& spec, int index,
                     int value) {
  const SlotRef ref = slot_at(spec, index);
  switch (ref.kind) {
    case SlotRef::Kind::image_size:
      arch.image_size = value;
      break;
    case SlotRef::Kind::depth:
      arch.units[ref.unit].depth = value;
      break;
    case SlotRef::Kind::kernel:
      arch.units[ref.unit].kernels[ref.layer] = value;
      break;
    default:
      arch.units[ref.unit].expansions[ref.layer] = value;
      break;
  }
}

// ---------------------------------------------------------------------------
// Per-slot sampling weights

struct ParamWeights {
  std::vector<double> values;  // one per slot, aligned with slot indices

  static ParamWeights uniform(const SearchSpaceSpec& spec) {
    return ParamWeights{std::vector<double>(slot_count(spec), 1.0)};
  }
};

inline void check_weights(const ParamWeights& weights,
                          const SearchSpaceSpec& spec) {
  if (static_cast<int>(weights.values.size()) != slot_count(spec))
    throw InvalidInput("weights: expected one entry per slot");
  bool any_positive = false;
  for (double w : weights.values) {
    if (w < 0.0 || !std::isfinite(w))
      throw InvalidInput("weights: entries must be finite and nonnegative");
    if (w > 0.0) any_positive = true;
  }
  if (!any_positive)
    throw InvalidInput("weights: at least one entry must be positive");
}

// ---------------------------------------------------------------------------
// Validation

struct Validity {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks the Architecture invariants against a spec. Only active layers
// (index < depth) are held to the candidate domains; inactive slots are
// placeholders kept solely so mutation is well-defined.
inline Validity validate(const Architecture& arch, const SearchSpaceSpec& spec) {
  Validity v;
  auto contains = [](const std::vector<int>& set, int x) {
    return std::binary_search(set.begin(), set.end(), x);
  };
  auto set_string = [](const std::vector<int>& set) {
    std::ostringstream os;
    os << "{";
    for (std::size_t i = 0; i < set.size(); ++i) os << (i ? "," : "") << set[i];
    os << "}";
    return os.str();
  };

  if (!contains(spec.image_sizes, arch.image_size))
    v.violations.push_back("image_size: " + std::to_string(arch.image_size) +
                           " ∉ " + set_string(spec.image_sizes));
  if (arch.units.size() != spec.units.size()) {
    v.violations.push_back("units: expected " +
                           std::to_string(spec.units.size()) + " units, got " +
                           std::to_string(arch.units.size()));
    return v;
  }
  for (int j = 0; j < spec.unit_count(); ++j) {
    const UnitSpec& us = spec.units[j];
    const UnitChoice& uc = arch.units[j];
    const std::string u = "u" + std::to_string(j + 1);
    if (!contains(us.depth_candidates, uc.depth)) {
      v.violations.push_back(u + "_depth: " + std::to_string(uc.depth) +
                             " ∉ " + set_string(us.depth_candidates));
    }
    if (static_cast<int>(uc.kernels.size()) != us.max_depth() ||
        static_cast<int>(uc.expansions.size()) != us.max_depth()) {
      v.violations.push_back(u + ": layer lists must have length " +
                             std::to_string(us.max_depth()));
      continue;
    }
    const int active = std::min(uc.depth, us.max_depth());
    for (int l = 0; l < active; ++l) {
      if (!contains(us.kernel_candidates, uc.kernels[l]))
        v.violations.push_back(u + "_l" + std::to_string(l + 1) + "_k: " +
                               std::to_string(uc.kernels[l]) + " ∉ " +
                               set_string(us.kernel_candidates));
      if (!contains(us.expansion_candidates, uc.expansions[l]))
        v.violations.push_back(u + "_l" + std::to_string(l + 1) + "_e: " +
                               std::to_string(uc.expansions[l]) + " ∉ " +
                               set_string(us.expansion_candidates));
    }
  }
  return v;
}

// ---------------------------------------------------------------------------
// Sampling and mutation

// Uniform sample with the image size pinned. Slots are drawn in slot order;
// inactive layer slots are filled uniformly too, so mutation can treat every
// slot alike.
inline Architecture sample_uniform_at(const SearchSpaceSpec& spec,
                                      int image_size, Rng& rng) {
  Architecture arch;
  arch.image_size = image_size;
  arch.units.reserve(spec.units.size());
  for (const UnitSpec& us : spec.units) {
    UnitChoice uc;
    uc.depth = rng.pick(us.depth_candidates);
    uc.kernels.resize(us.max_depth());
    uc.expansions.resize(us.max_depth());
    for (int l = 0; l < us.max_depth(); ++l) {
      uc.kernels[l] = rng.pick(us.kernel_candidates);
      uc.expansions[l] = rng.pick(us.expansion_candidates);
    }
    arch.units.push_back(std::move(uc));
  }
  return arch;
}

inline Architecture sample_uniform(const SearchSpaceSpec& spec, Rng& rng) {
  const int image_size = rng.pick(spec.image_sizes);
  return sample_uniform_at(spec, image_size, rng);
}

// Resamples `count` distinct slots chosen with probability proportional to
// `weights`. Each selected slot is redrawn uniformly from its candidate set
// excluding the current value whenever an alternative exists. `count` is
// clamped to the number of positive-weight slots.
inline Architecture mutate(const Architecture& arch, const SearchSpaceSpec& spec,
                           int count, const ParamWeights& weights, Rng& rng) {
  if (count < 1) throw InvalidInput("mutate: count must be >= 1");
  check_weights(weights, spec);

  const std::vector<std::size_t> chosen = weighted_sample_without_replacement(
      weights.values, static_cast<std::size_t>(count), rng);

  Architecture result = arch;
  for (std::size_t slot : chosen) {
    const std::vector<int>& candidates =
        slot_candidates(spec, static_cast<int>(slot));
    if (candidates.size() < 2) continue;  // no alternative value exists
    const int current = get_slot(result, spec, static_cast<int>(slot));
    std::vector<int> pool;
    pool.reserve(candidates.size());
    for (int c : candidates)
      if (c != current) pool.push_back(c);
    set_slot(result, spec, static_cast<int>(slot), rng.pick(pool));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Cardinality and enumeration

// Number of distinct architectures at one image size:
//   prod over units of sum over depths d of (|kernels| * |expansions|)^d.
// Inactive layer assignments do not multiply.
inline BigInt cardinality_at_size(const SearchSpaceSpec& spec) {
  BigInt total = 1;
  for (const UnitSpec& u : spec.units) {
    const BigInt per_layer = BigInt(u.kernel_candidates.size()) *
                             BigInt(u.expansion_candidates.size());
    BigInt unit_total = 0;
    for (int d : u.depth_candidates)
      unit_total += boost::multiprecision::pow(per_layer, static_cast<unsigned>(d));
    total *= unit_total;
  }
  return total;
}

inline BigInt cardinality(const SearchSpaceSpec& spec) {
  return BigInt(spec.image_sizes.size()) * cardinality_at_size(spec);
}

namespace detail {

// Canonical inactive state: minimum candidates.
inline void reset_inactive(UnitChoice& uc, const UnitSpec& us) {
  for (int l = uc.depth; l < us.max_depth(); ++l) {
    uc.kernels[l] = us.kernel_candidates.front();
    uc.expansions[l] = us.expansion_candidates.front();
  }
}

template <class F>
bool enumerate_unit(Architecture& arch, const SearchSpaceSpec& spec, int j,
                    F& emit) {
  if (j == spec.unit_count()) return emit(arch);
  const UnitSpec& us = spec.units[j];
  UnitChoice& uc = arch.units[j];
  for (int depth : us.depth_candidates) {
    uc.depth = depth;
    uc.kernels.assign(us.max_depth(), us.kernel_candidates.front());
    uc.expansions.assign(us.max_depth(), us.expansion_candidates.front());
    // Odometer over active layers, layer-major, kernel then expansion.
    while (true) {
      if (!enumerate_unit(arch, spec, j + 1, emit)) return false;
      int l = depth - 1;
      for (; l >= 0; --l) {
        auto& e = uc.expansions[l];
        auto it = std::find(us.expansion_candidates.begin(),
                            us.expansion_candidates.end(), e);
        if (++it != us.expansion_candidates.end()) {
          e = *it;
          break;
        }
        e = us.expansion_candidates.front();
        auto& k = uc.kernels[l];
        auto kit = std::find(us.kernel_candidates.begin(),
                             us.kernel_candidates.end(), k);
        if (++kit != us.kernel_candidates.end()) {
          k = *kit;
          break;
        }
        k = us.kernel_candidates.front();
      }
      if (l < 0) break;
    }
  }
  return true;
}

}  // namespace detail

// Visits every architecture at the given image size exactly once, in
// deterministic order: units left to right, depth ascending, then layer
// assignments odometer-style. Inactive layers are emitted in the canonical
// minimum state. `visit` may return false to stop early.
template <class F>
void for_each_architecture_at(const SearchSpaceSpec& spec, int image_size,
                              F&& visit) {
  Architecture arch;
  arch.image_size = image_size;
  arch.units.resize(spec.units.size());
  for (int j = 0; j < spec.unit_count(); ++j) {
    arch.units[j].kernels.resize(spec.units[j].max_depth());
    arch.units[j].expansions.resize(spec.units[j].max_depth());
  }
  auto emit = [&](const Architecture& a) -> bool {
    if constexpr (std::is_void_v<decltype(visit(a))>) {
      visit(a);
      return true;
    } else {
      return visit(a);
    }
  };
  detail::enumerate_unit(arch, spec, 0, emit);
}

template <class F>
void for_each_architecture(const SearchSpaceSpec& spec, F&& visit) {
  for (int image_size : spec.image_sizes)
    for_each_architecture_at(spec, image_size, visit);
}

// Materializes the full space; refuses when the exact cardinality exceeds
// `cap`.
inline std::vector<Architecture> enumerate_all(const SearchSpaceSpec& spec,
                                               std::uint64_t cap) {
  const BigInt total = cardinality(spec);
  if (total > BigInt(cap)) {
    throw EnumerationTooLargeError(
        "enumeration too large: space holds " + total.str() +
            " architectures, cap is " + std::to_string(cap),
        total.str());
  }
  std::vector<Architecture> out;
  out.reserve(static_cast<std::size_t>(total));
  for_each_architecture(spec, [&](const Architecture& a) { out.push_back(a); });
  return out;
}

// ---------------------------------------------------------------------------
// Fingerprint

inline std::string canonical_spec_string(const SearchSpaceSpec& spec) {
  std::ostringstream os;
  os << spec.name << "|sizes:";
  for (int s : spec.image_sizes) os << s << ",";
  for (const UnitSpec& u : spec.units) {
    os << "|unit:k=";
    for (int k : u.kernel_candidates) os << k << ",";
    os << ";e=";
    for (int e : u.expansion_candidates) os << e << ",";
    os << ";d=";
    for (int d : u.depth_candidates) os << d << ",";
    os << ";t=" << static_cast<int>(u.unit_type);
  }
  return os.str();
}

// FNV-1a over the canonical spec string, as 16 hex digits.
inline std::string spec_fingerprint(const SearchSpaceSpec& spec) {
  const std::string s = canonical_spec_string(spec);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace fox
