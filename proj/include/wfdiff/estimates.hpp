#pragma once

#include <cstdint>

namespace wfdiff {

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t replicates = 0;
};

}  // namespace wfdiff
