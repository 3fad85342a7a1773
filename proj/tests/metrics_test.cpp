#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "addpp/gridsearch.hpp"
#include "addpp/metrics.hpp"
#include "oracles.hpp"

using addpp::grid_search;
using addpp::GridSpec;
using addpp::kl_to_truth;
using addpp::negative_test_loglik;

TEST_CASE("kl_to_truth: identity, closed form, oracle, rescale invariance") {
  const std::vector<double> x = {0.3, 0.5, 0.2};
  CHECK(kl_to_truth(x, x) == 0.0);

  CHECK(kl_to_truth({1.0, 1.0}, {2.0, 0.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));

  std::mt19937_64 rng(61);
  for (int rep = 0; rep < 20; ++rep) {
    auto est = oracles::random_distribution(12, rng);
    auto truth = oracles::random_distribution(12, rng);
    const double direct = oracles::kl_direct(truth, est);
    CHECK(kl_to_truth(est, truth) == doctest::Approx(direct).epsilon(1e-11));

    auto est2 = est;
    auto truth2 = truth;
    for (double& v : est2) v *= 7.5;
    for (double& v : truth2) v *= 0.3;
    CHECK(kl_to_truth(est2, truth2) ==
          doctest::Approx(kl_to_truth(est, truth)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(kl_to_truth({0.0, 1.0}, {1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(kl_to_truth({0.0, 0.0}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(kl_to_truth({1.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("negative test log-likelihood: closed forms and oracle") {
  // constant intensity c: NLL = c T - N log c
  const std::vector<double> flat(8, 2.5);
  const std::vector<double> events = {0.1, 3.0, 7.7, 9.9};
  CHECK(negative_test_loglik(flat, events, 10.0) ==
        doctest::Approx(25.0 - 4.0 * std::log(2.5)).epsilon(1e-13));

  // no events: integral term only
  const std::vector<double> ramp = {1.0, 2.0, 3.0, 4.0};
  CHECK(negative_test_loglik(ramp, {}, 8.0) == doctest::Approx(20.0).epsilon(1e-13));

  std::mt19937_64 rng(73);
  std::uniform_real_distribution<double> uni(0.0, 10.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> lambda(10);
    for (double& v : lambda) v = uni(rng);
    std::vector<double> ts(15);
    for (double& t : ts) t = uni(rng);
    CHECK(negative_test_loglik(lambda, ts, 10.0) ==
          doctest::Approx(oracles::nll_direct(lambda, 10.0, ts)).epsilon(1e-11));
  }

  // zero bins are floored inside the log
  const std::vector<double> spiky = {0.0, 4.0};
  const double nll = negative_test_loglik(spiky, {1.0}, 8.0);
  CHECK(nll == doctest::Approx(16.0 - std::log(1e-12)).epsilon(1e-12));
}

namespace {

std::vector<std::vector<double>> demo_streams(unsigned seed, int per_process) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 10.0);
  std::vector<std::vector<double>> streams(2);
  for (auto& s : streams) {
    for (int i = 0; i < per_process; ++i) s.push_back(uni(rng));
    std::sort(s.begin(), s.end());
  }
  return streams;
}

}  // namespace

TEST_CASE("grid search: single cell, table order, argmin against the table") {
  const auto train = demo_streams(7, 60);
  const auto val = demo_streams(8, 20);

  GridSpec spec;
  spec.order = 2;
  spec.window = 0.2;
  spec.fit.tol = 1e-7;

  spec.bandwidths = {0.5};
  spec.bin_counts = {6};
  const auto single = grid_search(train, val, 10.0, spec);
  REQUIRE(single.table.size() == 1);
  CHECK(single.best_index == 0);
  CHECK(std::isfinite(single.table[0].score));

  spec.bandwidths = {0.4, 0.8, 1.2};
  spec.bin_counts = {4, 6, 8};
  const auto grid = grid_search(train, val, 10.0, spec);
  REQUIRE(grid.table.size() == 9);
  // bandwidth-major order
  int idx = 0;
  for (double h : spec.bandwidths)
    for (int m : spec.bin_counts) {
      CHECK(grid.table[idx].bandwidth == h);
      CHECK(grid.table[idx].bins == m);
      ++idx;
    }
  // argmin matches re-scanning the emitted table
  int best = 0;
  for (int i = 1; i < 9; ++i)
    if (grid.table[i].score < grid.table[best].score) best = i;
  CHECK(grid.best_index == best);
}

TEST_CASE("grid search tie-break prefers smaller h then smaller M") {
  // empty validation makes every cell's score the integral term, which is
  // the train event count: a guaranteed tie across the whole grid
  const auto train = demo_streams(9, 40);
  const std::vector<std::vector<double>> val(2);

  GridSpec spec;
  spec.order = 1;
  spec.bandwidths = {0.7, 0.3};
  spec.bin_counts = {8, 4};
  spec.fit.tol = 1e-7;
  const auto result = grid_search(train, val, 10.0, spec);
  REQUIRE(result.table.size() == 4);
  const double first = result.table[0].score;
  for (const auto& cell : result.table)
    CHECK(cell.score == doctest::Approx(first).epsilon(1e-9));
  CHECK(result.table[result.best_index].bandwidth == 0.3);
  CHECK(result.table[result.best_index].bins == 4);
}

TEST_CASE("grid search is deterministic and thread-count independent") {
  const auto train = demo_streams(10, 50);
  const auto val = demo_streams(11, 15);

  GridSpec spec;
  spec.order = 2;
  spec.bandwidths = {0.4, 0.9};
  spec.bin_counts = {4, 8};
  spec.fit.tol = 1e-7;

  spec.threads = 1;
  const auto serial = grid_search(train, val, 10.0, spec);
  spec.threads = 4;
  const auto parallel = grid_search(train, val, 10.0, spec);
  REQUIRE(serial.table.size() == parallel.table.size());
  for (std::size_t i = 0; i < serial.table.size(); ++i)
    CHECK(serial.table[i].score == parallel.table[i].score);
  CHECK(serial.best_index == parallel.best_index);
}

TEST_CASE("grid search rejects empty grids") {
  GridSpec spec;
  spec.bin_counts = {4};
  CHECK_THROWS_AS(grid_search({{1.0}}, {{2.0}}, 10.0, spec), std::invalid_argument);
}
