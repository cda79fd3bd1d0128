#include "ctxopt/cmaes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ctxopt {

CmaHyperParams default_hyperparams(int n) {
  if (n < 1) throw std::invalid_argument("default_hyperparams: n must be >= 1");
  CmaHyperParams hp;
  hp.lambda = 4 + static_cast<int>(std::floor(3.0 * std::log(n)));
  hp.mu = hp.lambda / 2;

  Vector raw(hp.mu);
  for (int i = 0; i < hp.mu; ++i)
    raw[i] = std::log((hp.lambda + 1) / 2.0) - std::log(i + 1.0);
  hp.weights = raw / raw.sum();
  hp.mu_eff = 1.0 / hp.weights.squaredNorm();

  const double n_d = n;
  hp.c_sigma = (hp.mu_eff + 2.0) / (n_d + hp.mu_eff + 5.0);
  hp.d_sigma = 1.0 +
               2.0 * std::max(0.0, std::sqrt((hp.mu_eff - 1.0) / (n_d + 1.0)) -
                                       1.0) +
               hp.c_sigma;
  hp.c_c = (4.0 + hp.mu_eff / n_d) / (n_d + 4.0 + 2.0 * hp.mu_eff / n_d);
  hp.c_1 = 2.0 / ((n_d + 1.3) * (n_d + 1.3) + hp.mu_eff);
  hp.c_mu = std::min(1.0 - hp.c_1,
                     2.0 * (hp.mu_eff - 2.0 + 1.0 / hp.mu_eff) /
                         ((n_d + 2.0) * (n_d + 2.0) + hp.mu_eff));
  hp.c_m = 1.0;
  return hp;
}

double chi_n(int n) {
  if (n < 1) throw std::invalid_argument("chi_n: n must be >= 1");
  const double n_d = n;
  return std::sqrt(n_d) * (1.0 - 1.0 / (4.0 * n_d) + 1.0 / (21.0 * n_d * n_d));
}

DistributionState DistributionState::initial(Vector mean, double sigma,
                                             Matrix cov) {
  if (sigma <= 0.0)
    throw std::invalid_argument("DistributionState: sigma must be positive");
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw std::invalid_argument("DistributionState: cov/mean dims disagree");
  DistributionState s;
  s.p_sigma = Vector::Zero(mean.size());
  s.p_c = Vector::Zero(mean.size());
  s.mean = std::move(mean);
  s.cov = std::move(cov);
  s.sigma = sigma;
  return s;
}

std::vector<Candidate> sample_candidates(const DistributionState& state,
                                         int count, Rng& rng) {
  const Matrix root = sym_sqrt(state.cov);
  std::vector<Candidate> out(count);
  for (auto& c : out) {
    c.z = rng.normal_vector(state.dim());
    c.y = root * c.z;
    c.x = state.mean + state.sigma * c.y;
  }
  return out;
}

std::vector<Candidate> sample_population(const DistributionState& state,
                                         const CmaHyperParams& hp, Rng& rng) {
  return sample_candidates(state, hp.lambda, rng);
}

void rank_candidates(std::vector<Candidate>& candidates) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     const bool fa = std::isfinite(a.fitness);
                     const bool fb = std::isfinite(b.fitness);
                     if (fa != fb) return fa;
                     return fa && a.fitness < b.fitness;
                   });
}

DistributionState update(const DistributionState& state,
                         const CmaHyperParams& hp,
                         const std::vector<Candidate>& ranked) {
  const int n = static_cast<int>(state.dim());
  if (static_cast<int>(ranked.size()) < hp.mu)
    throw InsufficientCandidates("update: fewer ranked candidates than mu");

  Vector delta_z = Vector::Zero(n);
  Vector delta_y = Vector::Zero(n);
  for (int i = 0; i < hp.mu; ++i) {
    delta_z += hp.weights[i] * ranked[i].z;
    delta_y += hp.weights[i] * ranked[i].y;
  }

  DistributionState next = state;
  next.p_sigma = (1.0 - hp.c_sigma) * state.p_sigma +
                 std::sqrt(hp.c_sigma * (2.0 - hp.c_sigma) * hp.mu_eff) *
                     delta_z;

  const double chi = chi_n(n);
  const double p_sigma_norm = next.p_sigma.norm();
  const double normalizer =
      std::sqrt(1.0 - std::pow(1.0 - hp.c_sigma, 2.0 * (state.t + 1)));
  const double h_sigma =
      (p_sigma_norm / normalizer < (1.4 + 2.0 / (n + 1.0)) * chi) ? 1.0 : 0.0;

  next.p_c = (1.0 - hp.c_c) * state.p_c +
             h_sigma * std::sqrt(hp.c_c * (2.0 - hp.c_c) * hp.mu_eff) * delta_y;

  next.mean = state.mean + hp.c_m * state.sigma * delta_y;

  Matrix rank_mu = Matrix::Zero(n, n);
  for (int i = 0; i < hp.mu; ++i)
    rank_mu +=
        hp.weights[i] * (ranked[i].y * ranked[i].y.transpose() - state.cov);
  const Matrix cov =
      (1.0 + (1.0 - h_sigma) * hp.c_1 * hp.c_c * (2.0 - hp.c_c)) * state.cov +
      hp.c_mu * rank_mu +
      hp.c_1 * (next.p_c * next.p_c.transpose() - state.cov);
  next.cov = symmetrized(cov);

  next.sigma = state.sigma *
               std::exp((hp.c_sigma / hp.d_sigma) * (p_sigma_norm / chi - 1.0));
  next.t = state.t + 1;
  return next;
}

bool should_restart(const DistributionState& state) {
  return state.sigma * state.sigma * max_eigenvalue(state.cov) < 1e-10;
}

RunResult optimize(const Objective& objective, const DistributionState& init,
                   const CmaHyperParams& hp, long budget, double target,
                   const RestartPolicy& restart_policy, Rng& rng) {
  if (budget < hp.lambda)
    throw std::invalid_argument("optimize: budget smaller than one generation");

  const Eigen::Index n = init.dim();
  const double sigma0 = init.sigma;
  DistributionState state = init;

  RunResult res;
  long evals = 0;
  bool done = false;
  while (!done && evals < budget) {
    const int count =
        static_cast<int>(std::min<long>(hp.lambda, budget - evals));
    auto candidates = sample_candidates(state, count, rng);
    for (auto& c : candidates) {
      c.fitness = objective(c.x);
      ++evals;
      if (c.fitness < res.best_f) {
        res.best_f = c.fitness;
        res.best_x = c.x;
      }
      if (res.best_f < target) {
        done = true;
        break;
      }
    }
    if (!done && count == hp.lambda) {
      rank_candidates(candidates);
      state = update(state, hp, candidates);
      state.eval_count = evals;
      if (restart_policy.enabled && should_restart(state)) {
        state = DistributionState::initial(
            rng.uniform_vector(n, restart_policy.mean_lo,
                               restart_policy.mean_hi),
            sigma0, Matrix::Identity(n, n));
        state.eval_count = evals;
        ++res.restarts;
      }
    }
    res.history.emplace_back(evals, res.best_f);
  }
  res.evals_used = evals;
  res.success = res.best_f < target;
  return res;
}

}  // namespace ctxopt
