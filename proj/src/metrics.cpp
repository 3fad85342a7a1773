#include "addpp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace addpp {

double kl_to_truth(const std::vector<double>& estimated,
                   const std::vector<double>& truth) {
  if (estimated.size() != truth.size() || truth.empty())
    throw std::invalid_argument("intensity vectors must share one bin grid");
  long double z_est = 0.0L, z_truth = 0.0L;
  for (double v : estimated) {
    if (v < 0.0) throw std::invalid_argument("negative estimated intensity");
    z_est += v;
  }
  for (double v : truth) {
    if (v < 0.0) throw std::invalid_argument("negative truth intensity");
    z_truth += v;
  }
  if (!(z_est > 0.0L) || !(z_truth > 0.0L))
    throw std::invalid_argument("intensity vectors must have positive totals");

  long double acc = 0.0L;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const long double t = truth[i] / z_truth;
    if (t == 0.0L) continue;
    const long double e = estimated[i] / z_est;
    if (e <= 0.0L)
      throw std::domain_error("estimate vanishes on a bin with positive truth");
    acc += t * std::log(static_cast<double>(t / e));
  }
  double kl = static_cast<double>(acc);
  if (kl < 0.0 && kl > -1e-9) kl = 0.0;
  return kl;
}

double negative_test_loglik(const std::vector<double>& intensity,
                            const std::vector<double>& events, double duration) {
  if (intensity.empty()) throw std::invalid_argument("empty intensity vector");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  const int m = static_cast<int>(intensity.size());
  long double integral = 0.0L;
  for (double v : intensity) {
    if (v < 0.0) throw std::invalid_argument("negative intensity");
    integral += static_cast<long double>(v) * duration / m;
  }
  long double loglik = 0.0L;
  for (double t : events) {
    int bin = static_cast<int>(std::floor(t / duration * m)) + 1;
    bin = std::clamp(bin, 1, m);
    loglik += std::log(std::max(intensity[bin - 1], 1e-12));
  }
  return static_cast<double>(integral - loglik);
}

}  // namespace addpp
