#include "addpp/simulate.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "addpp/errors.hpp"
#include "addpp/poset.hpp"

namespace addpp {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

Eigen::MatrixXd subset_block(const Eigen::MatrixXd& cov, const std::vector<int>& idx) {
  Eigen::MatrixXd block(idx.size(), idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = 0; j < idx.size(); ++j) block(i, j) = cov(idx[i], idx[j]);
  return block;
}

std::vector<int> subset_coords(std::uint32_t subset) {
  std::vector<int> idx;
  for (int j = 0; subset >> j; ++j)
    if (subset >> j & 1u) idx.push_back(j);
  return idx;
}

}  // namespace

std::vector<double> thinning_sample(const std::function<double(double)>& intensity,
                                    double bound, double duration,
                                    std::uint64_t seed) {
  if (!(bound > 0.0)) throw std::invalid_argument("intensity bound must be positive");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  constexpr int kProbePoints = 1000;
  for (int i = 0; i <= kProbePoints; ++i) {
    const double t = duration * i / kProbePoints;
    const double lambda = intensity(t);
    if (lambda < 0.0) throw std::invalid_argument("intensity is negative on [0, T]");
    if (lambda > bound * (1.0 + 1e-9))
      throw std::invalid_argument("intensity exceeds the thinning bound");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> events;
  double s = 0.0;
  while (true) {
    const double u = uniform(rng);
    s += -std::log1p(-u) / bound;  // exponential gap at rate `bound`
    if (s > duration) break;
    const double d = uniform(rng);
    if (d <= intensity(s) / bound) events.push_back(s);
  }
  return events;
}

std::vector<double> bernoulli_toy(double p, double step, double duration,
                                  std::uint64_t seed) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("probability must be in [0, 1]");
  if (!(step > 0.0)) throw std::invalid_argument("step must be positive");
  if (duration < 0.0) throw std::invalid_argument("duration must be nonnegative");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> events;
  const int candidates = static_cast<int>(std::floor(duration / step + 1e-9));
  for (int k = 1; k <= candidates; ++k) {
    const double u = uniform(rng);
    if (u < p) events.push_back(k * step);
  }
  return events;
}

GroundTruth mixture_generator(int processes, int components, std::size_t total_count,
                              double duration, std::uint64_t seed,
                              const MixtureOptions& options) {
  if (processes < 1 || processes > 10)
    throw std::invalid_argument("mixture generator supports 1..10 processes");
  if (components < 1) throw std::invalid_argument("need at least one component");
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be positive");
  if (options.truth_bins < 1) throw std::invalid_argument("need at least one truth bin");

  const int d = processes;
  const double dof = options.wishart_dof > 0.0 ? options.wishart_dof : d + 4;
  if (dof <= d - 1) throw std::invalid_argument("Wishart degrees of freedom too small");
  const double bump = duration / 20.0;
  const double scale =
      options.wishart_scale > 0.0 ? options.wishart_scale
                                  : std::max(dof - d - 1.0, 1.0) * bump * bump;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> unit_gamma(1.0, 1.0);

  GroundTruth truth;
  truth.processes = d;
  truth.duration = duration;
  truth.total_count = total_count;
  truth.truth_bins = options.truth_bins;

  // flat Dirichlet weights
  std::vector<double> weights(components);
  double wsum = 0.0;
  for (double& w : weights) {
    w = unit_gamma(rng) + 1e-12;
    wsum += w;
  }
  for (double& w : weights) w /= wsum;

  for (int c = 0; c < components; ++c) {
    GaussianComponent comp;
    comp.weight = weights[c];
    comp.mean.resize(d);
    for (int j = 0; j < d; ++j) comp.mean(j) = uniform(rng) * duration;

    // inverse Wishart with scale matrix `scale` * I via the Bartlett factor
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
      for (int i = 0; i < d; ++i) {
        std::chi_squared_distribution<double> chi(dof - i);
        a(i, i) = std::sqrt(chi(rng));
        for (int j = 0; j < i; ++j) a(i, j) = normal(rng);
      }
      const Eigen::MatrixXd w = a * a.transpose();
      Eigen::LLT<Eigen::MatrixXd> llt(w);
      if (llt.info() != Eigen::Success) continue;
      comp.cov = scale * w.inverse();
      Eigen::LLT<Eigen::MatrixXd> check(comp.cov);
      if (check.info() != Eigen::Success) continue;
      const auto diag = check.matrixL().toDenseMatrix().diagonal();
      if (diag.minCoeff() <= 1e-9 * diag.maxCoeff()) continue;
      ok = true;
    }
    if (!ok) throw NumericalError("could not sample a positive-definite covariance");
    truth.components.push_back(std::move(comp));
  }

  // component Cholesky factors for drawing
  std::vector<Eigen::MatrixXd> chol;
  for (const auto& comp : truth.components)
    chol.push_back(Eigen::LLT<Eigen::MatrixXd>(comp.cov).matrixL());
  std::discrete_distribution<int> pick(weights.begin(), weights.end());

  truth.streams.assign(d, {});
  Eigen::VectorXd z(d), x(d);
  std::size_t attempts = 0;
  const std::size_t max_attempts = 1000 * total_count + 1000;
  for (std::size_t n = 0; n < total_count;) {
    if (++attempts > max_attempts)
      throw NumericalError("mixture rejection sampling stalled outside [0, T]^D");
    const int c = pick(rng);
    for (int j = 0; j < d; ++j) z(j) = normal(rng);
    x = truth.components[c].mean + chol[c] * z;
    bool inside = true;
    for (int j = 0; j < d; ++j)
      if (x(j) < 0.0 || x(j) > duration) inside = false;
    if (!inside) continue;
    for (int j = 0; j < d; ++j) {
      truth.points.push_back(x(j));
      truth.streams[j].push_back(x(j));
    }
    ++n;
  }
  for (auto& stream : truth.streams) std::sort(stream.begin(), stream.end());

  // per-subset diagonal intensity on the midpoint grid
  const int m = options.truth_bins;
  for (std::uint32_t subset = 1; subset < (1u << d); ++subset) {
    std::vector<double> values(m);
    for (int tau = 1; tau <= m; ++tau)
      values[tau - 1] = mixture_diagonal_density(truth.components, subset,
                                                 (tau - 0.5) * duration / m);
    double z_norm = 0.0;
    if (subset_order(subset) == 1) {
      // analytic truncation mass of the 1-D marginal on [0, T]
      const int j = subset_coords(subset)[0];
      for (const auto& comp : truth.components) {
        const double mu = comp.mean(j);
        const double sd = std::sqrt(comp.cov(j, j));
        z_norm += comp.weight *
                  (normal_cdf((duration - mu) / sd) - normal_cdf((0.0 - mu) / sd));
      }
    } else {
      // diagonal slices have no natural mass; normalize on the grid
      for (double v : values) z_norm += v * duration / m;
    }
    if (!(z_norm > 0.0)) throw NumericalError("degenerate mixture normalization");
    const double scale_j = static_cast<double>(total_count) / z_norm;
    for (double& v : values) v *= scale_j;
    truth.intensity.emplace(subset, std::move(values));
  }
  return truth;
}

double mixture_diagonal_density(const std::vector<GaussianComponent>& components,
                                std::uint32_t subset, double t) {
  if (subset == 0) throw std::invalid_argument("subset must be nonempty");
  const auto idx = subset_coords(subset);
  const int a = static_cast<int>(idx.size());
  const double log2pi = std::log(2.0 * M_PI);
  double density = 0.0;
  for (const auto& comp : components) {
    Eigen::VectorXd q(a);
    for (int i = 0; i < a; ++i) q(i) = t - comp.mean(idx[i]);
    const Eigen::MatrixXd block = subset_block(comp.cov, idx);
    Eigen::LLT<Eigen::MatrixXd> llt(block);
    if (llt.info() != Eigen::Success)
      throw NumericalError("component covariance block not positive definite");
    const Eigen::VectorXd w = llt.matrixL().solve(q);
    double logdet = 0.0;
    const auto diag = llt.matrixL().toDenseMatrix().diagonal();
    for (int i = 0; i < a; ++i) logdet += 2.0 * std::log(diag(i));
    density += comp.weight *
               std::exp(-0.5 * (w.squaredNorm() + logdet + a * log2pi));
  }
  return density;
}

}  // namespace addpp
