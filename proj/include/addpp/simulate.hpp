#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace addpp {

// Ogata thinning for a 1-D inhomogeneous process: homogeneous candidates at
// rate `bound`, accepted with probability intensity/bound.  A probe grid
// rejects bounds that the intensity exceeds.
std::vector<double> thinning_sample(const std::function<double(double)>& intensity,
                                    double bound, double duration,
                                    std::uint64_t seed);

// One candidate every `step` seconds, kept with probability p.
std::vector<double> bernoulli_toy(double p, double step, double duration,
                                  std::uint64_t seed);

struct GaussianComponent {
  double weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct MixtureOptions {
  int truth_bins = 100;
  double wishart_dof = 0.0;    // 0 picks D + 4
  double wishart_scale = 0.0;  // 0 picks bumps of width about T/20
};

struct GroundTruth {
  int processes = 0;
  double duration = 0.0;
  std::size_t total_count = 0;
  int truth_bins = 0;
  std::vector<GaussianComponent> components;
  // per-subset per-bin intensity on the diagonal bin grid (midpoint rule)
  std::map<std::uint32_t, std::vector<double>> intensity;
  std::vector<double> points;                // flat draws, D coordinates each
  std::vector<std::vector<double>> streams;  // sorted coordinate projections
};

// Mixture-of-Gaussians intensity on [0,T]^D: Dirichlet weights, uniform
// means, inverse-Wishart covariances; events drawn from the density and
// truncated to the box by rejection, then projected per process.
GroundTruth mixture_generator(int processes, int components, std::size_t total_count,
                              double duration, std::uint64_t seed,
                              const MixtureOptions& options = {});

// Mixture marginal density for `subset`, evaluated on the diagonal (t,..,t).
double mixture_diagonal_density(const std::vector<GaussianComponent>& components,
                                std::uint32_t subset, double t);

}  // namespace addpp
