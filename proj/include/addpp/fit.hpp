#pragma once

#include <vector>

#include "addpp/model.hpp"

namespace addpp {

struct FitConfig {
  enum class Method { kNaturalGradient, kGradientDescent };
  enum class Init { kZeros, kRandom };

  Method method = Method::kNaturalGradient;
  int max_iters = 1000;
  double tol = 1e-6;    // threshold on max |eta - eta_hat|
  double step = 0.0;    // 0 picks the method default (1.0 natural, 0.1 plain)
  bool backtracking = true;
  Init init = Init::kZeros;
  unsigned seed = 0;    // used by random init only

  double initial_step() const {
    if (step > 0.0) return step;
    return method == Method::kNaturalGradient ? 1.0 : 0.1;
  }
};

struct FitTracePoint {
  double kl = 0.0;
  double max_residual = 0.0;
  double step = 0.0;
};

struct FitReport {
  int iterations_run = 0;
  std::vector<FitTracePoint> trace;  // entry 0 is the initial point
  bool converged = false;
  double final_kl = 0.0;
  double final_residual = 0.0;
  ParamVector final_theta;  // indexed by `domain` below
  ParamDomain domain;       // post-pruning; pruned() lists the removals
  double wall_seconds = 0.0;
};

// Removes every parameter whose empirical expectation vanishes; the removals
// are recorded on the returned domain.  Throws if nothing survives.
ParamDomain prune_domain(const ParamDomain& domain, const std::vector<double>& eta_hat);

// e-projection of p_hat onto the log-linear family over `domain`: minimizes
// the KL divergence from p_hat by natural gradient or plain gradient descent,
// stopping when the expectation parameters match within cfg.tol.
FitReport fit(const Distribution& phat, const ParamDomain& domain,
              const SampleSpace& space, const FitConfig& cfg);

}  // namespace addpp
