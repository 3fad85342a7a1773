#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "addpp/poset.hpp"

namespace addpp {

// Joint events for one subset, stored flat: event i occupies
// times[i*arity .. i*arity+arity-1], one coordinate per subset member in
// ascending process order.
struct JointEvents {
  int arity = 0;
  std::vector<double> times;

  std::size_t count() const {
    return arity == 0 ? 0 : times.size() / static_cast<std::size_t>(arity);
  }
  const double* event(std::size_t i) const {
    return times.data() + i * static_cast<std::size_t>(arity);
  }
  // Representative time used for binning: the coordinate mean.
  double representative(std::size_t i) const;
};

// Per-process event streams plus the coincidence-derived joint streams.
struct EventData {
  int processes = 0;
  double duration = 0.0;
  double window = 0.0;  // coincidence window used to derive joint events
  std::vector<std::vector<double>> per_process;   // sorted, in [0, T]
  std::map<std::uint32_t, JointEvents> joint;     // keyed by subset mask

  std::size_t count(std::uint32_t subset) const;
  const JointEvents* events_for(std::uint32_t subset) const;
};

// Derives joint events for every subset with 2 <= |I| <= max_order by greedy
// left-to-right matching: the earliest unmatched group with span <= delta is
// taken, and each event joins at most one group per subset.  Singleton
// subsets carry the raw streams.
EventData extract_joint_events(std::vector<std::vector<double>> per_process,
                               double duration, double delta, int max_order);

struct SmootherConfig {
  std::map<std::uint32_t, double> bandwidth;  // seconds, keyed by subset mask
  int bins = 0;
  double duration = 0.0;

  double bandwidth_for(std::uint32_t subset) const;
};

// Scott's rule for one projection: n^(-1/(arity+4)) times the pooled sample
// standard deviation of the event coordinates.  Falls back to one bin width
// when there are fewer than two events or the spread is zero.
double scotts_rule_bandwidth(const JointEvents& events, double duration, int bins);

// Fills a SmootherConfig with one bandwidth per subset: `h` if positive,
// otherwise Scott's rule per projection.
SmootherConfig make_smoother_config(const EventData& data, int bins, double h);

// Gaussian kernel smoother sigma_I(tau) with bin centers in seconds.
double smoother_value(std::uint32_t subset, int tau, const EventData& data,
                      const SmootherConfig& cfg);

struct Distribution {
  std::vector<double> mass;
  double total = 0.0;
};

// The kernel-smoothed empirical distribution over the sample space: mass at
// (J, tau) proportional to the sum of sigma_I(tau) over nonempty I within J,
// with a vanishing floor at the bottom element to keep it in the support.
Distribution empirical_distribution(const EventData& data,
                                    const SmootherConfig& cfg,
                                    const SampleSpace& space);

// Empirical expectation parameters over the domain, in domain order.
std::vector<double> empirical_eta(const Distribution& phat,
                                  const ParamDomain& domain,
                                  const SampleSpace& space);

}  // namespace addpp
