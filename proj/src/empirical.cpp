#include "addpp/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace addpp {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;
// Beyond this many bandwidths the Gaussian factor is below ~1e-314 and the
// event cannot move any cell; skipping it keeps the scan linear.
constexpr double kKernelCutoff = 38.0;

double gaussian(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

double JointEvents::representative(std::size_t i) const {
  const double* ev = event(i);
  double acc = 0.0;
  for (int j = 0; j < arity; ++j) acc += ev[j];
  return acc / arity;
}

std::size_t EventData::count(std::uint32_t subset) const {
  const auto it = joint.find(subset);
  return it == joint.end() ? 0 : it->second.count();
}

const JointEvents* EventData::events_for(std::uint32_t subset) const {
  const auto it = joint.find(subset);
  return it == joint.end() ? nullptr : &it->second;
}

EventData extract_joint_events(std::vector<std::vector<double>> per_process,
                               double duration, double delta, int max_order) {
  const int d = static_cast<int>(per_process.size());
  if (d < 1) throw std::invalid_argument("need at least one process stream");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (delta < 0.0) throw std::invalid_argument("coincidence window must be nonnegative");
  if (max_order < 1) throw std::invalid_argument("max coincidence order must be at least 1");
  max_order = std::min(max_order, d);

  for (auto& stream : per_process) {
    std::sort(stream.begin(), stream.end());
    for (double t : stream)
      if (t < 0.0 || t > duration)
        throw std::invalid_argument("event timestamp outside [0, T]");
  }

  EventData data;
  data.processes = d;
  data.duration = duration;
  data.window = delta;
  data.per_process = std::move(per_process);

  for (int j = 0; j < d; ++j) {
    JointEvents ev;
    ev.arity = 1;
    ev.times = data.per_process[j];
    data.joint.emplace(1u << j, std::move(ev));
  }

  const std::uint32_t full = (1u << d) - 1;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int order = subset_order(mask);
    if (order < 2 || order > max_order) continue;
    std::vector<const std::vector<double>*> streams;
    for (int j = 0; j < d; ++j)
      if (mask >> j & 1u) streams.push_back(&data.per_process[j]);

    JointEvents ev;
    ev.arity = order;
    std::vector<std::size_t> head(streams.size(), 0);
    while (true) {
      bool exhausted = false;
      for (std::size_t s = 0; s < streams.size(); ++s)
        if (head[s] >= streams[s]->size()) exhausted = true;
      if (exhausted) break;

      std::size_t argmin = 0;
      double lo = (*streams[0])[head[0]], hi = lo;
      for (std::size_t s = 1; s < streams.size(); ++s) {
        const double t = (*streams[s])[head[s]];
        if (t < lo) {
          lo = t;
          argmin = s;
        }
        hi = std::max(hi, t);
      }
      if (hi - lo <= delta) {
        for (std::size_t s = 0; s < streams.size(); ++s)
          ev.times.push_back((*streams[s])[head[s]]);
        for (auto& h : head) ++h;
      } else {
        ++head[argmin];
      }
    }
    data.joint.emplace(mask, std::move(ev));
  }
  return data;
}

double SmootherConfig::bandwidth_for(std::uint32_t subset) const {
  const auto it = bandwidth.find(subset);
  if (it == bandwidth.end())
    throw std::invalid_argument("no bandwidth configured for subset " + subset_key(subset));
  return it->second;
}

double scotts_rule_bandwidth(const JointEvents& events, double duration, int bins) {
  const double fallback = duration / bins;
  const std::size_t n = events.count();
  if (n < 2) return fallback;
  const std::size_t coords = events.times.size();
  double mean = 0.0;
  for (double t : events.times) mean += t;
  mean /= static_cast<double>(coords);
  double ss = 0.0;
  for (double t : events.times) ss += (t - mean) * (t - mean);
  const double sd = std::sqrt(ss / static_cast<double>(coords - 1));
  if (!(sd > 0.0)) return fallback;
  return std::pow(static_cast<double>(n), -1.0 / (events.arity + 4)) * sd;
}

SmootherConfig make_smoother_config(const EventData& data, int bins, double h) {
  if (bins < 1) throw std::invalid_argument("need at least one bin");
  if (h < 0.0) throw std::invalid_argument("bandwidth must be positive");
  SmootherConfig cfg;
  cfg.bins = bins;
  cfg.duration = data.duration;
  for (const auto& [mask, events] : data.joint)
    cfg.bandwidth[mask] =
        h > 0.0 ? h : scotts_rule_bandwidth(events, data.duration, bins);
  return cfg;
}

double smoother_value(std::uint32_t subset, int tau, const EventData& data,
                      const SmootherConfig& cfg) {
  if (tau < 1 || tau > cfg.bins) throw std::invalid_argument("bin index out of range");
  const JointEvents* events = data.events_for(subset);
  if (events == nullptr || events->count() == 0) return 0.0;
  const double h = cfg.bandwidth_for(subset);
  if (!(h > 0.0)) throw std::invalid_argument("bandwidth must be positive");

  const double center = (tau - 0.5) * cfg.duration / cfg.bins;
  const int a = events->arity;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < events->count(); ++i) {
    const double* ev = events->event(i);
    double prod = 1.0;
    for (int j = 0; j < a; ++j) {
      const double x = (center - ev[j]) / h;
      if (std::abs(x) >= kKernelCutoff) {
        prod = 0.0;
        break;
      }
      prod *= gaussian(x);
    }
    acc += prod;
  }
  return static_cast<double>(acc / (static_cast<long double>(events->count()) *
                                    std::pow(static_cast<long double>(h), a)));
}

Distribution empirical_distribution(const EventData& data,
                                    const SmootherConfig& cfg,
                                    const SampleSpace& space) {
  if (data.processes != space.process_count())
    throw std::invalid_argument("event data does not match the sample space");
  if (cfg.bins != space.bin_count() || cfg.duration != space.duration())
    throw std::invalid_argument("smoother config does not match the sample space");

  const int m = space.bin_count();
  const int n_sub = space.subset_count();

  // sigma rows per subset rank; an empty row means the subset has no events
  std::vector<std::vector<double>> sigma(n_sub);
  for (int r = 0; r < n_sub; ++r) {
    const std::uint32_t mask = space.subset_at_rank(r);
    if (data.count(mask) == 0) continue;
    auto& row = sigma[r];
    row.resize(m);
    for (int tau = 1; tau <= m; ++tau) row[tau - 1] = smoother_value(mask, tau, data, cfg);
  }

  std::vector<double> unnorm(space.size(), 0.0);
  double umax = 0.0;
  for (int r = 0; r < n_sub; ++r) {
    const std::uint32_t mask = space.subset_at_rank(r);
    for (int tau = 1; tau <= m; ++tau) {
      long double acc = 0.0L;
      for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
        const auto& row = sigma[space.rank_of_subset(sub)];
        if (!row.empty()) acc += row[tau - 1];
      }
      const double u = static_cast<double>(acc);
      unnorm[space.index_at(r, tau)] = u;
      umax = std::max(umax, u);
    }
  }
  if (umax <= 0.0)
    throw std::invalid_argument("empirical distribution undefined: no events at all");
  // Eq. (10) assigns no mass to the least element; a vanishing floor keeps it
  // inside the support required by the log-linear model.
  unnorm[space.bottom_index()] = 1e-9 * umax;

  long double z = 0.0L;
  for (double u : unnorm) z += u;
  Distribution out;
  out.mass.resize(unnorm.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < unnorm.size(); ++i) {
    out.mass[i] = static_cast<double>(unnorm[i] / z);
    total += out.mass[i];
  }
  out.total = static_cast<double>(total);
  return out;
}

std::vector<double> empirical_eta(const Distribution& phat,
                                  const ParamDomain& domain,
                                  const SampleSpace& space) {
  const auto eta_all = upset_sums(phat.mass, space);
  std::vector<double> eta(domain.size());
  for (int i = 0; i < domain.size(); ++i) eta[i] = eta_all[domain.space_index(i)];
  return eta;
}

}  // namespace addpp
