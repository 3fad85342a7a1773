#include "addpp/gridsearch.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "addpp/errors.hpp"
#include "addpp/metrics.hpp"

namespace addpp {

namespace {

double cell_score(const EventData& train, const EventData& validation,
                  double duration, double bandwidth, int bins,
                  const GridSpec& spec) {
  const auto space = SampleSpace::build(train.processes, bins, duration);
  const auto domain = ParamDomain::build(space, spec.order);
  const auto cfg = make_smoother_config(train, bins, bandwidth);
  const auto phat = empirical_distribution(train, cfg, space);
  const auto report = fit(phat, domain, space, spec.fit);
  const auto p = model_distribution(report.final_theta, space, report.domain);

  double score = 0.0;
  for (std::uint32_t subset = 1; subset < (1u << train.processes); ++subset) {
    if (subset_order(subset) > spec.order) continue;
    const auto est = intensity_estimate(p, subset, train.count(subset), space);
    if (est.no_events) continue;  // nothing learned for this projection
    std::vector<double> events;
    if (const auto* ev = validation.events_for(subset))
      for (std::size_t i = 0; i < ev->count(); ++i)
        events.push_back(ev->representative(i));
    score += negative_test_loglik(est.per_bin, events, duration);
  }
  return score;
}

}  // namespace

GridResult grid_search(const std::vector<std::vector<double>>& train_streams,
                       const std::vector<std::vector<double>>& validation_streams,
                       double duration, const GridSpec& spec) {
  if (spec.bandwidths.empty() || spec.bin_counts.empty())
    throw std::invalid_argument("grid search needs nonempty grids");
  if (train_streams.size() != validation_streams.size())
    throw std::invalid_argument("train and validation streams disagree on the process count");

  const int d = static_cast<int>(train_streams.size());
  const EventData train = extract_joint_events(train_streams, duration, spec.window, d);
  const EventData validation =
      extract_joint_events(validation_streams, duration, spec.window, d);

  GridResult result;
  for (double h : spec.bandwidths)
    for (int m : spec.bin_counts)
      result.table.push_back({h, m, std::numeric_limits<double>::infinity(), false});

  int workers = spec.threads > 0 ? spec.threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(result.table.size())));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.table.size()) break;
      auto& cell = result.table[i];
      try {
        cell.score = cell_score(train, validation, duration, cell.bandwidth,
                                cell.bins, spec);
      } catch (const std::exception&) {
        cell.failed = true;
        cell.score = std::numeric_limits<double>::infinity();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& cell = result.table[i];
    if (cell.failed) continue;
    if (result.best_index < 0) {
      result.best_index = static_cast<int>(i);
      continue;
    }
    const auto& best = result.table[result.best_index];
    const bool better =
        cell.score < best.score ||
        (cell.score == best.score &&
         (cell.bandwidth < best.bandwidth ||
          (cell.bandwidth == best.bandwidth && cell.bins < best.bins)));
    if (better) result.best_index = static_cast<int>(i);
  }
  if (result.best_index < 0)
    throw NumericalError("every grid cell failed to fit");
  return result;
}

}  // namespace addpp
