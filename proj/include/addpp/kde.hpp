#pragma once

#include <cstdint>
#include <vector>

#include "addpp/empirical.hpp"

namespace addpp {

// Kernel density estimation baseline for one subset's joint events,
// evaluated on the diagonal bin grid.
struct KdeModel {
  int arity = 0;
  std::vector<double> points;  // flat, arity coordinates per event
  double bandwidth = 0.0;
  double duration = 0.0;
  int bins = 0;
};

KdeModel make_kde_model(const JointEvents& events, double bandwidth,
                        double duration, int bins);

struct KdeResult {
  std::vector<double> prob;  // per-bin probability, sums to 1 unless flagged
  bool no_points = false;
};

// Gaussian product-kernel density at the diagonal bin centers, normalized
// over bins.  Zero vector (flagged) when the model holds no points.
KdeResult kde_distribution(const KdeModel& model);

// Rescale to events per second so the intensity integrates to `count`.
std::vector<double> kde_intensity(const KdeResult& result, std::size_t count,
                                  double duration);

}  // namespace addpp
