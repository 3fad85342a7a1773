#include "addpp/kde.hpp"

#include <cmath>
#include <stdexcept>

namespace addpp {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
constexpr double kKernelCutoff = 38.0;  // matches the empirical smoother

double gaussian(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

KdeModel make_kde_model(const JointEvents& events, double bandwidth,
                        double duration, int bins) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (bins < 1) throw std::invalid_argument("need at least one bin");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  KdeModel model;
  model.arity = events.arity == 0 ? 1 : events.arity;
  model.points = events.times;
  model.bandwidth = bandwidth;
  model.duration = duration;
  model.bins = bins;
  return model;
}

KdeResult kde_distribution(const KdeModel& model) {
  if (!(model.bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be positive");
  if (model.bins < 1) throw std::invalid_argument("need at least one bin");
  KdeResult out;
  out.prob.assign(model.bins, 0.0);
  const std::size_t n =
      model.arity == 0 ? 0 : model.points.size() / static_cast<std::size_t>(model.arity);
  if (n == 0) {
    out.no_points = true;
    return out;
  }

  const double h = model.bandwidth;
  std::vector<double> density(model.bins);
  long double total = 0.0L;
  for (int tau = 1; tau <= model.bins; ++tau) {
    const double center = (tau - 0.5) * model.duration / model.bins;
    long double acc = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
      const double* ev = model.points.data() + i * static_cast<std::size_t>(model.arity);
      double prod = 1.0;
      for (int j = 0; j < model.arity; ++j) {
        const double x = (center - ev[j]) / h;
        if (std::abs(x) >= kKernelCutoff) {
          prod = 0.0;
          break;
        }
        prod *= gaussian(x);
      }
      acc += prod;
    }
    density[tau - 1] = static_cast<double>(
        acc / (static_cast<long double>(n) * std::pow(static_cast<long double>(h), model.arity)));
    total += density[tau - 1];
  }
  if (total <= 0.0L) {
    out.no_points = true;
    return out;
  }
  for (int tau = 0; tau < model.bins; ++tau)
    out.prob[tau] = static_cast<double>(density[tau] / total);
  return out;
}

std::vector<double> kde_intensity(const KdeResult& result, std::size_t count,
                                  double duration) {
  std::vector<double> out(result.prob.size(), 0.0);
  if (result.no_points || count == 0) return out;
  const double scale = static_cast<double>(count) * result.prob.size() / duration;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = result.prob[i] * scale;
  return out;
}

}  // namespace addpp
