#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "addpp/fit.hpp"
#include "oracles.hpp"

using addpp::Distribution;
using addpp::FitConfig;
using addpp::ParamDomain;
using addpp::SampleSpace;

namespace {

Distribution from_mass(std::vector<double> mass) {
  Distribution d;
  d.total = 0.0;
  for (double v : mass) d.total += v;
  d.mass = std::move(mass);
  return d;
}

Distribution fitted_distribution(const addpp::FitReport& report, const SampleSpace& space) {
  return addpp::model_distribution(report.final_theta, space, report.domain);
}

// KL value at the optimum found by the independent coordinate-descent
// minimizer, with the objective evaluated through the set-logic oracle.
double oracle_optimal_kl(const Distribution& phat, const ParamDomain& domain,
                         const SampleSpace& space) {
  auto objective = [&](const std::vector<double>& theta) {
    return oracles::kl_direct(phat.mass, oracles::model_bruteforce(theta, domain, space));
  };
  const auto theta = oracles::coordinate_descent(std::vector<double>(domain.size(), 0.0),
                                                 objective, 1e-13, 300);
  return objective(theta);
}

}  // namespace

TEST_CASE("pruning keeps positive-expectation parameters only") {
  const auto space = SampleSpace::build(2, 2, 1.0);
  const auto domain = ParamDomain::build(space, 2);

  std::vector<double> eta_hat(domain.size(), 0.5);
  CHECK(addpp::prune_domain(domain, eta_hat).size() == domain.size());
  CHECK(addpp::prune_domain(domain, eta_hat).pruned().empty());

  eta_hat[3] = 0.0;
  const auto cut = addpp::prune_domain(domain, eta_hat);
  CHECK(cut.size() == domain.size() - 1);
  REQUIRE(cut.pruned().size() == 1);
  CHECK(cut.pruned()[0] == domain.member(3));

  std::fill(eta_hat.begin(), eta_hat.end(), 0.0);
  CHECK_THROWS_AS(addpp::prune_domain(domain, eta_hat), std::invalid_argument);
}

TEST_CASE("full-order fit recovers the empirical distribution exactly") {
  std::mt19937_64 rng(101);
  const auto space = SampleSpace::build(2, 3, 1.0);
  const auto domain = ParamDomain::build(space, 2);
  const auto phat = from_mass(oracles::random_distribution(space.size(), rng));

  FitConfig cfg;
  cfg.tol = 1e-9;
  cfg.max_iters = 200;
  const auto report = addpp::fit(phat, domain, space, cfg);
  CHECK(report.converged);
  CHECK(addpp::kl_divergence(phat, fitted_distribution(report, space)) < 1e-10);
}

TEST_CASE("uniform empirical distribution is fit by zero parameters from random init") {
  const auto space = SampleSpace::build(2, 2, 1.0);
  const auto domain = ParamDomain::build(space, 2);
  const auto uniform = from_mass(std::vector<double>(space.size(), 1.0 / space.size()));

  FitConfig cfg;
  cfg.init = FitConfig::Init::kRandom;
  cfg.seed = 9;
  cfg.tol = 1e-10;
  const auto report = addpp::fit(uniform, domain, space, cfg);
  CHECK(report.converged);
  const auto p = fitted_distribution(report, space);
  for (double v : p.mass) CHECK(v == doctest::Approx(1.0 / space.size()).epsilon(1e-7));
}

TEST_CASE("restricted-order fit reaches the oracle optimum") {
  const auto space = SampleSpace::build(2, 2, 1.0);
  const auto domain = ParamDomain::build(space, 1);
  const auto phat = from_mass({0.02, 0.10, 0.08, 0.12, 0.08, 0.35, 0.25});

  FitConfig cfg;
  cfg.tol = 1e-11;
  cfg.max_iters = 500;
  const auto report = addpp::fit(phat, domain, space, cfg);
  CHECK(report.converged);
  const double kl_fit = addpp::kl_divergence(phat, fitted_distribution(report, space));
  const double kl_best = oracle_optimal_kl(phat, domain, space);
  CHECK(kl_fit == doctest::Approx(kl_best).epsilon(1e-5));
  CHECK(kl_fit <= kl_best + 1e-7);
}

TEST_CASE("natural gradient, plain gradient, and random init agree at the optimum") {
  std::mt19937_64 rng(113);
  for (int rep = 0; rep < 5; ++rep) {
    const int d = 2, m = 2 + static_cast<int>(rng() % 2);
    const int k = 1 + static_cast<int>(rng() % 2);
    const auto space = SampleSpace::build(d, m, 1.0);
    const auto domain = ParamDomain::build(space, k);
    const auto phat = from_mass(oracles::random_distribution(space.size(), rng));

    FitConfig nat;
    nat.tol = 1e-10;
    nat.max_iters = 400;
    const auto r_nat = addpp::fit(phat, domain, space, nat);

    FitConfig plain;
    plain.method = FitConfig::Method::kGradientDescent;
    plain.tol = 1e-8;
    plain.max_iters = 400000;
    plain.step = 1.0;
    const auto r_plain = addpp::fit(phat, domain, space, plain);

    FitConfig rand_init = nat;
    rand_init.init = FitConfig::Init::kRandom;
    rand_init.seed = 1000 + rep;
    const auto r_rand = addpp::fit(phat, domain, space, rand_init);

    CHECK(r_nat.converged);
    CHECK(r_plain.converged);
    CHECK(r_rand.converged);
    const double kl_nat = addpp::kl_divergence(phat, fitted_distribution(r_nat, space));
    const double kl_plain = addpp::kl_divergence(phat, fitted_distribution(r_plain, space));
    const double kl_rand = addpp::kl_divergence(phat, fitted_distribution(r_rand, space));
    CHECK(std::abs(kl_nat - kl_plain) < 1e-5);
    CHECK(std::abs(kl_nat - kl_rand) < 1e-5);
  }
}

TEST_CASE("backtracking keeps the KL trace non-increasing") {
  std::mt19937_64 rng(127);
  for (int rep = 0; rep < 25; ++rep) {
    const int d = 1 + static_cast<int>(rng() % 2);
    const int m = 2 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % d);
    const auto space = SampleSpace::build(d, m, 1.0);
    const auto domain = ParamDomain::build(space, k);
    const auto phat = from_mass(oracles::random_distribution(space.size(), rng));

    FitConfig cfg;
    cfg.method = rep % 2 == 0 ? FitConfig::Method::kNaturalGradient
                              : FitConfig::Method::kGradientDescent;
    cfg.init = FitConfig::Init::kRandom;
    cfg.seed = static_cast<unsigned>(rep);
    cfg.tol = 1e-9;
    cfg.max_iters = 5000;
    const auto report = addpp::fit(phat, domain, space, cfg);
    REQUIRE(report.trace.size() == static_cast<std::size_t>(report.iterations_run) + 1);
    for (std::size_t i = 1; i < report.trace.size(); ++i)
      CHECK(report.trace[i].kl <= report.trace[i - 1].kl);
    for (const auto& pt : report.trace) CHECK(std::isfinite(pt.kl));
  }
}

TEST_CASE("converged reports satisfy moment matching, checked independently") {
  std::mt19937_64 rng(131);
  const auto space = SampleSpace::build(2, 3, 1.0);
  const auto domain = ParamDomain::build(space, 2);
  const auto phat = from_mass(oracles::random_distribution(space.size(), rng));

  FitConfig cfg;
  cfg.tol = 1e-8;
  const auto report = addpp::fit(phat, domain, space, cfg);
  REQUIRE(report.converged);

  const auto p = fitted_distribution(report, space);
  const auto eta = oracles::eta_bruteforce(p.mass, space);
  const auto eta_hat = oracles::eta_bruteforce(phat.mass, space);
  for (int i = 0; i < report.domain.size(); ++i) {
    const int idx = report.domain.space_index(i);
    CHECK(std::abs(eta[idx] - eta_hat[idx]) < cfg.tol);
  }
}

TEST_CASE("nested orders never hurt the final KL") {
  std::mt19937_64 rng(139);
  const auto space = SampleSpace::build(3, 2, 1.0);
  const auto phat = from_mass(oracles::random_distribution(space.size(), rng));

  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 3; ++k) {
    FitConfig cfg;
    cfg.tol = 1e-10;
    cfg.max_iters = 2000;
    const auto report = addpp::fit(phat, ParamDomain::build(space, k), space, cfg);
    REQUIRE(report.converged);
    const double kl = addpp::kl_divergence(phat, fitted_distribution(report, space));
    CHECK(kl <= prev + 1e-9);
    prev = kl;
  }
}

TEST_CASE("hitting the iteration cap reports non-convergence without throwing") {
  std::mt19937_64 rng(149);
  const auto space = SampleSpace::build(2, 2, 1.0);
  const auto domain = ParamDomain::build(space, 1);
  const auto phat = from_mass(oracles::random_distribution(space.size(), rng));

  FitConfig cfg;
  cfg.max_iters = 1;
  cfg.tol = 1e-14;
  const auto report = addpp::fit(phat, domain, space, cfg);
  CHECK_FALSE(report.converged);
  CHECK(report.iterations_run <= 1);
}

TEST_CASE("fit prunes zero-expectation parameters and reports them") {
  const auto space = SampleSpace::build(1, 3, 3.0);
  const auto domain = ParamDomain::build(space, 1);
  // no mass at or above bin 3: eta_hat(({1},3)) = 0
  const auto phat = from_mass({0.2, 0.5, 0.3, 0.0});

  FitConfig cfg;
  cfg.tol = 1e-10;
  const auto report = addpp::fit(phat, domain, space, cfg);
  CHECK(report.domain.size() == 2);
  REQUIRE(report.domain.pruned().size() == 1);
  CHECK(report.domain.pruned()[0] == addpp::PosetState{1u, 3, false});
  CHECK(report.converged);
}
