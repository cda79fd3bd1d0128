#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "ctxopt/cmaes.hpp"
#include "ctxopt/mogpr.hpp"

namespace ctxopt {

struct TooFewSolutions : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateFeatures : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Initial search distribution handed to the optimizer.
struct DistributionInit {
  Vector m0;
  double sigma0 = 1.0;
  Matrix C0;
};

/// Warm start from the GP posterior at the new context: the posterior mean
/// becomes the initial mean, the step-size is sqrt(trace(cov)/n) clipped to
/// [sigma_min, sigma_max], and the shape matrix stays identity (the
/// posterior describes where the optimum is, not the objective landscape).
DistributionInit cws_init_from_posterior(const GaussianParams& posterior,
                                         double sigma_min, double sigma_max);
DistributionInit cws_init(const MogprModel& model, const Vector& alpha_new,
                          double sigma_min = 1e-2, double sigma_max = 2.0);

struct ScoredSolution {
  Vector x;
  double fitness = 0.0;
};

/// Warm start from the best gamma-fraction of an evaluated solution set:
/// m0 is their mean, sigma^2 C0 their scatter matrix plus alpha_ws^2 I,
/// split so that det(C0) = 1.
DistributionInit ws_cmaes_init(const std::vector<ScoredSolution>& solutions,
                               double gamma = 0.1, double alpha_ws = 0.1);

/// Index of the training context closest to alpha_new in Euclidean norm;
/// ties resolve to the smallest index.
std::size_t select_similar_task(const ContextDataset& data,
                                const Vector& alpha_new);

/// Linear policy x = A * phi(alpha) with phi(alpha) = (alpha^T, 1)^T, plus
/// the shared sampling shape sigma^2 C.
struct LinearPolicy {
  Matrix A;  // n x (n_alpha + 1)
  double sigma = 1.0;
  Matrix C;
};

Vector policy_features(const Vector& alpha);
Vector policy_predict(const LinearPolicy& policy, const Vector& alpha);

using ContextualFn = std::function<double(const Vector& x, const Vector& alpha)>;
using ContextSampler = std::function<Vector(Rng& rng)>;

/// Approximate contextual policy-search baseline. Each generation draws one
/// context per candidate, samples x ~ N(A phi(alpha), sigma^2 C), ranks by
/// each candidate's own objective value, refits A by weighted least squares
/// over the mu best and adapts sigma and C with the usual path machinery on
/// the sampled displacements.
LinearPolicy ccmaes_baseline_train(const ContextualFn& objective,
                                   const ContextSampler& sample_context,
                                   int n, int n_alpha, long budget, Rng& rng);

}  // namespace ctxopt
