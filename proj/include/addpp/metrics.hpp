#pragma once

#include <vector>

namespace addpp {

// KL divergence from the (normalized) truth vector to the (normalized)
// estimate, with 0 log 0 = 0.  Throws std::domain_error when the estimate
// vanishes on a bin where the truth does not.
double kl_to_truth(const std::vector<double>& estimated,
                   const std::vector<double>& truth);

// Negative log-likelihood of binned test events under a per-bin intensity:
// integral term minus the log intensity at each event's bin, with zero bins
// floored at 1e-12 inside the log.
double negative_test_loglik(const std::vector<double>& intensity,
                            const std::vector<double>& events, double duration);

}  // namespace addpp
