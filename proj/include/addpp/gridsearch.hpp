#pragma once

#include <vector>

#include "addpp/fit.hpp"

namespace addpp {

struct GridSpec {
  std::vector<double> bandwidths;
  std::vector<int> bin_counts;
  int order = 1;
  double window = 0.1;  // coincidence window for joint events
  FitConfig fit;        // per-cell fit configuration
  int threads = 0;      // 0 = hardware concurrency
};

struct GridCell {
  double bandwidth = 0.0;
  int bins = 0;
  double score = 0.0;  // +inf when the cell failed
  bool failed = false;
};

struct GridResult {
  std::vector<GridCell> table;  // bandwidth-major grid order
  int best_index = -1;          // argmin score, ties to smaller h then smaller M
};

// Fits one model per (h, M) cell on the training streams and scores the
// summed negative validation log-likelihood over every nonempty subset up to
// `order`.  Cells run concurrently; the table order is the grid order.
GridResult grid_search(const std::vector<std::vector<double>>& train_streams,
                       const std::vector<std::vector<double>>& validation_streams,
                       double duration, const GridSpec& spec);

}  // namespace addpp
