#include "ctxopt/contextual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ctxopt {

DistributionInit cws_init_from_posterior(const GaussianParams& posterior,
                                         double sigma_min, double sigma_max) {
  const Eigen::Index n = posterior.mean.size();
  if (posterior.cov.rows() != n || posterior.cov.cols() != n)
    throw std::invalid_argument("cws_init: posterior dims disagree");
  const double raw =
      std::sqrt(std::max(posterior.cov.trace(), 0.0) / static_cast<double>(n));
  return {posterior.mean, std::clamp(raw, sigma_min, sigma_max),
          Matrix::Identity(n, n)};
}

DistributionInit cws_init(const MogprModel& model, const Vector& alpha_new,
                          double sigma_min, double sigma_max) {
  return cws_init_from_posterior(predict(model, alpha_new), sigma_min,
                                 sigma_max);
}

DistributionInit ws_cmaes_init(const std::vector<ScoredSolution>& solutions,
                               double gamma, double alpha_ws) {
  const auto k = static_cast<long>(solutions.size());
  const long k_gamma = static_cast<long>(std::floor(gamma * k));
  if (k_gamma < 1)
    throw TooFewSolutions("ws_cmaes_init: selected fraction is empty");

  std::vector<std::size_t> order(solutions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const bool fa = std::isfinite(solutions[a].fitness);
                     const bool fb = std::isfinite(solutions[b].fitness);
                     if (fa != fb) return fa;
                     return fa && solutions[a].fitness < solutions[b].fitness;
                   });

  const Eigen::Index n = solutions.front().x.size();
  Vector mean = Vector::Zero(n);
  for (long i = 0; i < k_gamma; ++i) mean += solutions[order[i]].x;
  mean /= static_cast<double>(k_gamma);

  Matrix scatter = alpha_ws * alpha_ws * Matrix::Identity(n, n);
  for (long i = 0; i < k_gamma; ++i) {
    const Vector d = solutions[order[i]].x - mean;
    scatter += (d * d.transpose()) / static_cast<double>(k_gamma);
  }
  scatter = symmetrized(scatter);

  // Split sigma^2 C = scatter so that det(C) = 1.
  const CholeskyResult factor = cholesky(scatter);
  const double sigma0 = std::exp(log_det_from_cholesky(factor.L) /
                                 (2.0 * static_cast<double>(n)));
  return {mean, sigma0, scatter / (sigma0 * sigma0)};
}

std::size_t select_similar_task(const ContextDataset& data,
                                const Vector& alpha_new) {
  if (data.size() < 1)
    throw std::invalid_argument("select_similar_task: dataset is empty");
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double d = (data.context(i) - alpha_new).squaredNorm();
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

Vector policy_features(const Vector& alpha) {
  Vector phi(alpha.size() + 1);
  phi.head(alpha.size()) = alpha;
  phi[alpha.size()] = 1.0;
  return phi;
}

Vector policy_predict(const LinearPolicy& policy, const Vector& alpha) {
  if (policy.A.cols() != alpha.size() + 1)
    throw std::invalid_argument("policy_predict: context dims disagree");
  return policy.A * policy_features(alpha);
}

LinearPolicy ccmaes_baseline_train(const ContextualFn& objective,
                                   const ContextSampler& sample_context,
                                   int n, int n_alpha, long budget, Rng& rng) {
  const CmaHyperParams hp = default_hyperparams(n);
  if (budget < hp.lambda)
    throw std::invalid_argument("ccmaes_baseline_train: budget too small");
  const Eigen::Index n_phi = n_alpha + 1;

  LinearPolicy policy{Matrix::Zero(n, n_phi), 1.0, Matrix::Identity(n, n)};
  Vector p_sigma = Vector::Zero(n);
  Vector p_c = Vector::Zero(n);
  int t = 0;

  struct Sample {
    Vector z, y, x, phi;
    double f = 0.0;
  };
  const double chi = chi_n(n);

  long evals = 0;
  while (evals + hp.lambda <= budget) {
    const Matrix root = sym_sqrt(policy.C);
    std::vector<Sample> samples(hp.lambda);
    for (auto& s : samples) {
      const Vector alpha = sample_context(rng);
      if (alpha.size() != static_cast<Eigen::Index>(n_alpha))
        throw std::invalid_argument(
            "ccmaes_baseline_train: sampled context has wrong dimension");
      s.phi = policy_features(alpha);
      s.z = rng.normal_vector(n);
      s.y = root * s.z;
      s.x = policy.A * s.phi + policy.sigma * s.y;
      s.f = objective(s.x, alpha);
      ++evals;
    }
    std::stable_sort(samples.begin(), samples.end(),
                     [](const Sample& a, const Sample& b) {
                       const bool fa = std::isfinite(a.f);
                       const bool fb = std::isfinite(b.f);
                       if (fa != fb) return fa;
                       return fa && a.f < b.f;
                     });

    // Policy refit: weighted least squares of the mu best solutions on
    // their context features.
    Matrix feature_gram = Matrix::Zero(n_phi, n_phi);
    Matrix cross = Matrix::Zero(n, n_phi);
    for (int i = 0; i < hp.mu; ++i) {
      feature_gram +=
          hp.weights[i] * (samples[i].phi * samples[i].phi.transpose());
      cross += hp.weights[i] * (samples[i].x * samples[i].phi.transpose());
    }
    feature_gram += 1e-8 * Matrix::Identity(n_phi, n_phi);
    Eigen::LLT<Matrix> llt(feature_gram);
    if (llt.info() != Eigen::Success)
      throw DegenerateFeatures(
          "ccmaes_baseline_train: weighted feature Gram is singular");
    const Matrix a_new = llt.solve(cross.transpose()).transpose();

    // Shape and step-size adaptation on the sampled displacements.
    Vector delta_z = Vector::Zero(n);
    Vector delta_y = Vector::Zero(n);
    for (int i = 0; i < hp.mu; ++i) {
      delta_z += hp.weights[i] * samples[i].z;
      delta_y += hp.weights[i] * samples[i].y;
    }
    p_sigma = (1.0 - hp.c_sigma) * p_sigma +
              std::sqrt(hp.c_sigma * (2.0 - hp.c_sigma) * hp.mu_eff) * delta_z;
    const double p_sigma_norm = p_sigma.norm();
    const double normalizer =
        std::sqrt(1.0 - std::pow(1.0 - hp.c_sigma, 2.0 * (t + 1)));
    const double h_sigma =
        (p_sigma_norm / normalizer < (1.4 + 2.0 / (n + 1.0)) * chi) ? 1.0 : 0.0;
    p_c = (1.0 - hp.c_c) * p_c +
          h_sigma * std::sqrt(hp.c_c * (2.0 - hp.c_c) * hp.mu_eff) * delta_y;

    Matrix rank_mu = Matrix::Zero(n, n);
    for (int i = 0; i < hp.mu; ++i)
      rank_mu += hp.weights[i] *
                 (samples[i].y * samples[i].y.transpose() - policy.C);
    policy.C = symmetrized(
        (1.0 + (1.0 - h_sigma) * hp.c_1 * hp.c_c * (2.0 - hp.c_c)) * policy.C +
        hp.c_mu * rank_mu + hp.c_1 * (p_c * p_c.transpose() - policy.C));
    policy.sigma *=
        std::exp((hp.c_sigma / hp.d_sigma) * (p_sigma_norm / chi - 1.0));
    policy.A = a_new;
    ++t;
  }
  return policy;
}

}  // namespace ctxopt
