#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "addpp/empirical.hpp"
#include "addpp/poset.hpp"

namespace addpp {

// Log-linear model parameters, indexed by ParamDomain order.  The partition
// function makes theta(bottom) = -psi implicit; it must be recomputed after
// every change to theta.
struct ParamVector {
  std::vector<double> theta;
  double psi = 0.0;
};

ParamVector zero_params(const ParamDomain& domain, const SampleSpace& space);

// Evaluates the model for a fixed (space, domain) pair, reusing buffers
// across calls.  Cost per evaluation is linear in the number of bins:
// prefix sums of theta along bins, then a submask accumulation per state.
class ModelEvaluator {
 public:
  ModelEvaluator(const SampleSpace& space, const ParamDomain& domain);

  // Recomputes prefix sums, the stabilized log partition function, and the
  // per-state log masses for this theta.
  void set_theta(const std::vector<double>& theta);

  double psi() const { return static_cast<double>(psi_); }
  // Unrounded partition function; the optimizer's line search compares
  // objective values whose differences sit far below double noise.
  long double psi_extended() const { return psi_; }
  // Down-set sums A(w) = sum of theta over s <= w; log p = A - psi.
  const std::vector<double>& log_unnorm() const { return logu_; }
  void masses(std::vector<double>& out) const;

  const SampleSpace& space() const { return *space_; }
  const ParamDomain& domain() const { return *domain_; }

 private:
  const SampleSpace* space_;
  const ParamDomain* domain_;
  std::vector<int> slot_of_rank_;   // subset rank -> dense slot, -1 above order k
  std::vector<std::uint32_t> slot_mask_;
  std::vector<double> cum_;         // slot*M + (tau-1): prefix sums of theta
  std::vector<double> logu_;
  long double psi_ = 0.0L;
};

// Recomputes and stores params.psi; returns it.
double recompute_psi(ParamVector& params, const ParamDomain& domain,
                     const SampleSpace& space);

// p(w) = exp(sum of theta over the down-set of w, minus psi).
Distribution model_distribution(const ParamVector& params,
                                const SampleSpace& space,
                                const ParamDomain& domain);

// Expectation parameters eta(s) = sum of p over the up-set of s, in domain
// order.
std::vector<double> expectation_params(const Distribution& p,
                                       const ParamDomain& domain,
                                       const SampleSpace& space);

// KL divergence from p_hat to p with the 0 log 0 = 0 convention.  Throws
// std::domain_error when p vanishes somewhere p_hat does not.
double kl_divergence(const Distribution& p_hat, const Distribution& p);

struct FisherMatrix {
  Eigen::MatrixXd entries;
  double jitter_applied = 0.0;
};

// g_ij = eta(join(s_i, s_j)) - eta(s_i) eta(s_j); the up-sets of two states
// intersect exactly in the up-set of their join, so this equals the double
// sum over the space.  `jitter` is added to the diagonal.
FisherMatrix fisher_matrix(const Distribution& p, const std::vector<double>& eta,
                           const ParamDomain& domain, const SampleSpace& space,
                           double jitter);

struct IntensityEstimate {
  std::vector<double> per_bin;  // events per second, one entry per bin
  bool no_events = false;       // set when the subset had zero events
};

// Per-bin intensity of the (at least) J process: the model mass of bin tau
// summed over supersets of J, normalized over bins and rescaled so the
// intensity integrates to the observed event count.
IntensityEstimate intensity_estimate(const Distribution& p, std::uint32_t subset,
                                     std::size_t n_events, const SampleSpace& space);
IntensityEstimate intensity_estimate(const Distribution& p, std::uint32_t subset,
                                     const EventData& data, const SampleSpace& space);

}  // namespace addpp
