#pragma once

#include <vector>

#include "fox/search_space.hpp"

namespace fox {

// One measured subnet: the raw slot encoding plus its recorded validation
// accuracy and on-target latency.
struct DatasetRecord {
  Architecture arch;
  double accuracy = 0.0;    // percent, in [0, 100]
  double latency_ms = 0.0;  // strictly positive
};

}  // namespace fox
