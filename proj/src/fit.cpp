#include "addpp/fit.hpp"

#include <Eigen/Cholesky>
#include <chrono>
#include <cmath>
#include <random>

#include "addpp/errors.hpp"

namespace addpp {

namespace {

constexpr double kStepFloor = 1e-8;

long double dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += static_cast<long double>(a[i]) * b[i];
  return acc;
}

// Solves G d = delta by Cholesky, escalating diagonal jitter from 1e-8 to
// 1e-2 of the mean diagonal when the factorization fails.
Eigen::VectorXd natural_direction(const Distribution& p,
                                  const std::vector<double>& eta,
                                  const Eigen::VectorXd& delta,
                                  const ParamDomain& domain,
                                  const SampleSpace& space) {
  const FisherMatrix g = fisher_matrix(p, eta, domain, space, 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(g.entries);
  if (llt.info() == Eigen::Success) return llt.solve(delta);

  const double mean_diag = g.entries.diagonal().mean();
  for (double mult = 1e-8; mult < 1.5e-2; mult *= 10.0) {
    Eigen::MatrixXd jittered = g.entries;
    jittered.diagonal().array() += mult * mean_diag;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt.solve(delta);
  }
  throw NumericalError("Fisher matrix not positive definite after jitter escalation");
}

}  // namespace

ParamDomain prune_domain(const ParamDomain& domain, const std::vector<double>& eta_hat) {
  if (eta_hat.size() != static_cast<std::size_t>(domain.size()))
    throw std::invalid_argument("eta_hat does not match the parameter domain");
  std::vector<char> keep(eta_hat.size());
  bool any = false;
  for (std::size_t i = 0; i < eta_hat.size(); ++i) {
    keep[i] = eta_hat[i] > 0.0;
    any = any || keep[i];
  }
  if (!any) throw std::invalid_argument("every parameter was pruned: empty empirical support");
  return domain.restricted(keep);
}

FitReport fit(const Distribution& phat, const ParamDomain& domain0,
              const SampleSpace& space, const FitConfig& cfg) {
  if (phat.mass.size() != static_cast<std::size_t>(space.size()))
    throw std::invalid_argument("empirical distribution does not match the space");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg.step < 0.0) throw std::invalid_argument("step must be positive");

  const auto t0 = std::chrono::steady_clock::now();

  const auto eta_hat_all = upset_sums(phat.mass, space);
  std::vector<double> eta_hat0(domain0.size());
  for (int i = 0; i < domain0.size(); ++i) eta_hat0[i] = eta_hat_all[domain0.space_index(i)];

  FitReport report;
  report.domain = prune_domain(domain0, eta_hat0);
  const ParamDomain& domain = report.domain;
  std::vector<double> eta_hat(domain.size());
  for (int i = 0; i < domain.size(); ++i) eta_hat[i] = eta_hat_all[domain.space_index(i)];

  std::vector<double> theta(domain.size(), 0.0);
  if (cfg.init == FitConfig::Init::kRandom) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (double& v : theta) v = normal(rng);
  }

  // KL(p_hat, p(theta)) = sum p_hat log p_hat - theta . eta_hat + psi(theta):
  // the entropy term is constant, so the line search needs one partition
  // function per trial and nothing else.
  long double neg_entropy = 0.0L;
  for (double v : phat.mass)
    if (v > 0.0) neg_entropy += static_cast<long double>(v) * std::log(v);

  ModelEvaluator eval(space, domain);
  eval.set_theta(theta);
  long double kl = neg_entropy - dot(theta, eta_hat) + eval.psi_extended();

  Distribution p;
  eval.masses(p.mass);
  p.total = 1.0;
  auto eta_all = upset_sums(p.mass, space);
  std::vector<double> eta(domain.size());
  auto refresh_eta = [&] {
    for (int i = 0; i < domain.size(); ++i) eta[i] = eta_all[domain.space_index(i)];
  };
  refresh_eta();

  auto residual = [&] {
    double r = 0.0;
    for (int i = 0; i < domain.size(); ++i) r = std::max(r, std::abs(eta[i] - eta_hat[i]));
    return r;
  };

  double res = residual();
  report.trace.push_back({kl, res, 0.0});

  Eigen::VectorXd delta(domain.size());
  std::vector<double> trial(domain.size());
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (res < cfg.tol) {
      report.converged = true;
      break;
    }

    for (int i = 0; i < domain.size(); ++i) delta[i] = eta[i] - eta_hat[i];
    Eigen::VectorXd direction =
        cfg.method == FitConfig::Method::kNaturalGradient
            ? natural_direction(p, eta, delta, domain, space)
            : delta;

    double step = cfg.initial_step();
    bool accepted = false;
    double kl_trial = 0.0;
    while (true) {
      for (int i = 0; i < domain.size(); ++i) trial[i] = theta[i] - step * direction[i];
      eval.set_theta(trial);
      kl_trial = neg_entropy - dot(trial, eta_hat) + eval.psi();
      if (!cfg.backtracking || kl_trial <= kl) {
        accepted = true;
        break;
      }
      step *= 0.5;
      if (step < kStepFloor) break;
    }
    if (!accepted) {
      eval.set_theta(theta);  // restore evaluator state for the final report
      break;
    }

    theta.swap(trial);
    kl = kl_trial;
    eval.masses(p.mass);
    eta_all = upset_sums(p.mass, space);
    refresh_eta();
    res = residual();
    ++report.iterations_run;
    report.trace.push_back({kl, res, step});
  }
  if (!report.converged && res < cfg.tol) report.converged = true;

  report.final_kl = kl;
  report.final_residual = res;
  report.final_theta.theta = std::move(theta);
  report.final_theta.psi = eval.psi();
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace addpp
