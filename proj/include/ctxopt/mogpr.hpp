#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ctxopt/linalg.hpp"
#include "ctxopt/rng.hpp"

namespace ctxopt {

struct SingularGram : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class KernelKind { Linear, Rbf, Matern52 };

/// One input kernel. The scaled distance for Rbf/Matern52 is
/// r(x, x') = sqrt(sum_i (x_i - x'_i)^2 / l_i^2); Linear has no length
/// scales.
struct KernelParams {
  KernelKind kind = KernelKind::Rbf;
  double variance = 1.0;  // sigma_q^2
  Vector length_scales;   // one per input dimension, empty for Linear
};

/// Output-coupling term of one kernel: B = a a^T + kappa * I, positive
/// definite by construction.
struct Coregionalization {
  Vector a;
  double kappa = 0.1;

  Matrix matrix() const {
    return a * a.transpose() + kappa * Matrix::Identity(a.size(), a.size());
  }
};

struct PairMeta {
  double best_f = 0.0;
  long evals_used = 0;
};

/// Previously solved tasks: one (context, best solution) pair per row.
struct ContextDataset {
  Matrix contexts;   // M x context_dim
  Matrix solutions;  // M x solution_dim
  std::vector<PairMeta> meta;

  Eigen::Index size() const { return contexts.rows(); }
  Eigen::Index context_dim() const { return contexts.cols(); }
  Eigen::Index solution_dim() const { return solutions.cols(); }
  Vector context(Eigen::Index i) const { return contexts.row(i).transpose(); }
  Vector solution(Eigen::Index i) const { return solutions.row(i).transpose(); }
};

double kernel_eval(const KernelParams& k, const Vector& x, const Vector& xp);

/// M x M matrix of kernel values over the dataset contexts.
Matrix kernel_matrix(const KernelParams& k, const Matrix& contexts);

/// Gram matrix of the linear model of coregionalization,
/// sum_q kron(K(contexts; k_q), B_q), laid out point-major: row i*L + d is
/// output coordinate d of training point i.
Matrix build_gram(const ContextDataset& data,
                  const std::vector<KernelParams>& kernels,
                  const std::vector<Coregionalization>& coreg);

/// Trained multi-output GP. Outputs are centered per coordinate on the
/// training mean; gram_factor caches the lower Cholesky factor of the Gram
/// matrix plus jitter.
struct MogprModel {
  ContextDataset data;
  std::vector<KernelParams> kernels;
  std::vector<Coregionalization> coreg;
  Vector output_center;
  Matrix gram_factor;
  double jitter = 0.0;
  std::uint64_t fit_seed = 0;
};

/// Assemble a model from explicit hyperparameters: centers the outputs and
/// factorizes the Gram matrix. Throws SingularGram when factorization fails
/// even after jitter escalation.
MogprModel make_model(ContextDataset data, std::vector<KernelParams> kernels,
                      std::vector<Coregionalization> coreg);

/// Posterior distribution of the solution vector at a new context.
GaussianParams predict(const MogprModel& model, const Vector& alpha_new);

/// Log density of the centered training outputs under the model prior.
double log_marginal_likelihood(const MogprModel& model);

struct FitConfig {
  int restarts = 3;
  int generations = 200;
  double cma_sigma0 = 0.25;
};

/// Prior hyperparameters used before any data-driven choice: unit variances
/// and length scales, uniform output coupling.
std::vector<KernelParams> default_kernels(Eigen::Index context_dim);
std::vector<Coregionalization> default_coreg(Eigen::Index output_dim);

/// Fit the three-kernel coregionalization model by maximizing the marginal
/// likelihood over log-transformed hyperparameters with multi-restart
/// CMA-ES. A single-pair dataset skips optimization and keeps the priors.
MogprModel fit(const ContextDataset& data, const FitConfig& config, Rng& rng);

}  // namespace ctxopt
