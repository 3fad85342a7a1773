#include "addpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "addpp/errors.hpp"

namespace addpp {

ParamVector zero_params(const ParamDomain& domain, const SampleSpace& space) {
  ParamVector params;
  params.theta.assign(domain.size(), 0.0);
  recompute_psi(params, domain, space);
  return params;
}

ModelEvaluator::ModelEvaluator(const SampleSpace& space, const ParamDomain& domain)
    : space_(&space), domain_(&domain) {
  slot_of_rank_.assign(space.subset_count(), -1);
  for (int r = 0; r < space.subset_count(); ++r) {
    const std::uint32_t mask = space.subset_at_rank(r);
    if (subset_order(mask) > domain.max_order()) continue;
    slot_of_rank_[r] = static_cast<int>(slot_mask_.size());
    slot_mask_.push_back(mask);
  }
  cum_.assign(slot_mask_.size() * static_cast<std::size_t>(space.bin_count()), 0.0);
  logu_.assign(space.size(), 0.0);
}

void ModelEvaluator::set_theta(const std::vector<double>& theta) {
  if (theta.size() != static_cast<std::size_t>(domain_->size()))
    throw std::invalid_argument("theta does not match the parameter domain");
  for (double v : theta)
    if (!std::isfinite(v)) throw std::invalid_argument("theta must be finite");

  const int m = space_->bin_count();
  std::fill(cum_.begin(), cum_.end(), 0.0);
  for (int i = 0; i < domain_->size(); ++i) {
    const auto& s = domain_->member(i);
    const int slot = slot_of_rank_[space_->rank_of_subset(s.subset)];
    cum_[static_cast<std::size_t>(slot) * m + (s.bin - 1)] = theta[i];
  }
  for (std::size_t slot = 0; slot < slot_mask_.size(); ++slot) {
    double* row = cum_.data() + slot * m;
    for (int tau = 1; tau < m; ++tau) row[tau] += row[tau - 1];
  }

  logu_[space_->bottom_index()] = 0.0;
  for (int r = 0; r < space_->subset_count(); ++r) {
    const std::uint32_t mask = space_->subset_at_rank(r);
    for (int tau = 1; tau <= m; ++tau) {
      long double acc = 0.0L;
      for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
        const int slot = slot_of_rank_[space_->rank_of_subset(sub)];
        if (slot >= 0) acc += cum_[static_cast<std::size_t>(slot) * m + (tau - 1)];
      }
      logu_[space_->index_at(r, tau)] = static_cast<double>(acc);
    }
  }

  // log-sum-exp with max shift
  double mx = logu_[0];
  for (double v : logu_) mx = std::max(mx, v);
  long double z = 0.0L;
  for (double v : logu_) z += std::exp(static_cast<long double>(v - mx));
  psi_ = mx + std::log(z);
}

void ModelEvaluator::masses(std::vector<double>& out) const {
  out.resize(logu_.size());
  long double total = 0.0L;
  for (std::size_t i = 0; i < logu_.size(); ++i) {
    out[i] = std::exp(logu_[i] - psi_);
    total += out[i];
  }
  // exact unit mass, independent of rounding in psi
  for (double& v : out) v = static_cast<double>(v / total);
}

double recompute_psi(ParamVector& params, const ParamDomain& domain,
                     const SampleSpace& space) {
  ModelEvaluator eval(space, domain);
  eval.set_theta(params.theta);
  params.psi = eval.psi();
  return params.psi;
}

Distribution model_distribution(const ParamVector& params,
                                const SampleSpace& space,
                                const ParamDomain& domain) {
  ModelEvaluator eval(space, domain);
  eval.set_theta(params.theta);
  Distribution out;
  eval.masses(out.mass);
  long double total = 0.0L;
  for (double v : out.mass) total += v;
  out.total = static_cast<double>(total);
  return out;
}

std::vector<double> expectation_params(const Distribution& p,
                                       const ParamDomain& domain,
                                       const SampleSpace& space) {
  if (std::abs(p.total - 1.0) > 1e-6)
    throw std::invalid_argument("expectation parameters need a normalized distribution");
  const auto eta_all = upset_sums(p.mass, space);
  std::vector<double> eta(domain.size());
  for (int i = 0; i < domain.size(); ++i) eta[i] = eta_all[domain.space_index(i)];
  return eta;
}

double kl_divergence(const Distribution& p_hat, const Distribution& p) {
  if (p_hat.mass.size() != p.mass.size())
    throw std::invalid_argument("distributions live on different spaces");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < p_hat.mass.size(); ++i) {
    const double a = p_hat.mass[i];
    if (a == 0.0) continue;
    const double b = p.mass[i];
    if (b <= 0.0)
      throw std::domain_error("KL divergence undefined: support of p does not cover p_hat");
    acc += static_cast<long double>(a) * std::log(static_cast<long double>(a) / b);
  }
  double kl = static_cast<double>(acc);
  if (kl < 0.0 && kl > -1e-9) kl = 0.0;  // rounding on near-identical inputs
  return kl;
}

FisherMatrix fisher_matrix(const Distribution& p, const std::vector<double>& eta,
                           const ParamDomain& domain, const SampleSpace& space,
                           double jitter) {
  if (eta.size() != static_cast<std::size_t>(domain.size()))
    throw std::invalid_argument("eta does not match the parameter domain");
  if (jitter < 0.0) throw std::invalid_argument("jitter must be nonnegative");
  const auto eta_all = upset_sums(p.mass, space);
  const int n = domain.size();
  FisherMatrix g;
  g.entries.resize(n, n);
  g.jitter_applied = jitter;
  for (int i = 0; i < n; ++i) {
    const int si = domain.space_index(i);
    for (int j = i; j < n; ++j) {
      const double value =
          eta_all[space.join_index(si, domain.space_index(j))] - eta[i] * eta[j];
      g.entries(i, j) = value;
      g.entries(j, i) = value;
    }
    g.entries(i, i) += jitter;
  }
  return g;
}

IntensityEstimate intensity_estimate(const Distribution& p, std::uint32_t subset,
                                     std::size_t n_events, const SampleSpace& space) {
  if (subset == 0 || subset >= (1u << space.process_count()))
    throw std::invalid_argument("subset out of range");
  const int m = space.bin_count();
  IntensityEstimate out;
  out.per_bin.assign(m, 0.0);
  if (n_events == 0) {
    out.no_events = true;
    return out;
  }

  // mass of bin tau over all states whose subset contains J
  std::vector<double> q(m, 0.0);
  const std::uint32_t full = static_cast<std::uint32_t>(space.subset_count());
  const std::uint32_t comp = full & ~subset;
  long double total = 0.0L;
  for (int tau = 1; tau <= m; ++tau) {
    long double acc = 0.0L;
    std::uint32_t sub = comp;
    while (true) {
      acc += p.mass[space.index_of(subset | sub, tau)];
      if (sub == 0) break;
      sub = (sub - 1) & comp;
    }
    q[tau - 1] = static_cast<double>(acc);
    total += acc;
  }
  if (!(total > 0.0))
    throw NumericalError("subset " + subset_key(subset) + " carries no model mass");

  const double scale =
      static_cast<double>(n_events) * m / space.duration() / static_cast<double>(total);
  for (int tau = 0; tau < m; ++tau) out.per_bin[tau] = q[tau] * scale;
  return out;
}

IntensityEstimate intensity_estimate(const Distribution& p, std::uint32_t subset,
                                     const EventData& data, const SampleSpace& space) {
  return intensity_estimate(p, subset, data.count(subset), space);
}

}  // namespace addpp
