#pragma once

#include <string>
#include <vector>

#include "fox/errors.hpp"
#include "fox/search_space.hpp"

namespace fox {

struct FeatureVector {
  std::vector<double> values;
};

// 6 per-unit terms plus 2 bridge terms per adjacent unit pair.
inline int feature_count(const SearchSpaceSpec& spec) {
  const int m = spec.unit_count();
  return 6 * m + 2 * (m - 1);
}

// Fixed order: unit-major blocks (D, E^avg, K^avg, E^total, E^total*D,
// K^avg*D), then bridge pairs (E_{j,j+1}, K_{j,j+1}) in unit order.
inline std::vector<std::string> feature_names(const SearchSpaceSpec& spec) {
  const int m = spec.unit_count();
  std::vector<std::string> names;
  names.reserve(feature_count(spec));
  for (int j = 1; j <= m; ++j) {
    const std::string js = std::to_string(j);
    names.push_back("D_" + js);
    names.push_back("E^avg_" + js);
    names.push_back("K^avg_" + js);
    names.push_back("E^total_" + js);
    names.push_back("E^total_" + js + "*D_" + js);
    names.push_back("K^avg_" + js + "*D_" + js);
  }
  for (int j = 1; j <= m - 1; ++j) {
    names.push_back("E_" + std::to_string(j) + "," + std::to_string(j + 1));
    names.push_back("K_" + std::to_string(j) + "," + std::to_string(j + 1));
  }
  return names;
}

// Engineered regression inputs, computed from active layers only. The bridge
// terms take the first layer of unit j+1 (the layer where the channel count
// changes between units). Image size is not a feature: it selects which model
// pair of the predictor bank applies.
inline FeatureVector featurize(const Architecture& arch,
                               const SearchSpaceSpec& spec) {
  const Validity v = validate(arch, spec);
  if (!v.ok())
    throw InvalidInput("featurize: invalid architecture: " + v.violations[0]);

  const int m = spec.unit_count();
  FeatureVector fv;
  fv.values.reserve(feature_count(spec));
  for (int j = 0; j < m; ++j) {
    const UnitChoice& uc = arch.units[j];
    const double depth = static_cast<double>(uc.depth);
    double e_total = 0.0;
    double k_sum = 0.0;
    for (int l = 0; l < uc.depth; ++l) {
      e_total += uc.expansions[l];
      k_sum += uc.kernels[l];
    }
    const double e_avg = e_total / depth;
    const double k_avg = k_sum / depth;
    fv.values.push_back(depth);
    fv.values.push_back(e_avg);
    fv.values.push_back(k_avg);
    fv.values.push_back(e_total);
    fv.values.push_back(e_total * depth);
    fv.values.push_back(k_avg * depth);
  }
  for (int j = 0; j < m - 1; ++j) {
    fv.values.push_back(static_cast<double>(arch.units[j + 1].expansions[0]));
    fv.values.push_back(static_cast<double>(arch.units[j + 1].kernels[0]));
  }
  return fv;
}

// Indices of the features whose value can change when the given slot
// changes. Used to attribute model significance back to architecture
// parameters (guidance weights, adjustment suggestions). The image-size slot
// maps to no feature.
inline std::vector<int> slot_feature_indices(const SearchSpaceSpec& spec,
                                             int slot_index) {
  const SlotRef ref = slot_at(spec, slot_index);
  const int m = spec.unit_count();
  const int bridge_base = 6 * m;
  std::vector<int> out;
  switch (ref.kind) {
    case SlotRef::Kind::image_size:
      break;
    case SlotRef::Kind::depth:
      out = {6 * ref.unit + 0, 6 * ref.unit + 4, 6 * ref.unit + 5};
      break;
    case SlotRef::Kind::kernel:
      out = {6 * ref.unit + 2};
      if (ref.layer == 0 && ref.unit >= 1)
        out.push_back(bridge_base + 2 * (ref.unit - 1) + 1);
      break;
    case SlotRef::Kind::expansion:
      out = {6 * ref.unit + 1, 6 * ref.unit + 3};
      if (ref.layer == 0 && ref.unit >= 1)
        out.push_back(bridge_base + 2 * (ref.unit - 1));
      break;
  }
  return out;
}

}  // namespace fox
