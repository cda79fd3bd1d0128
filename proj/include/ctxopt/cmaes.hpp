#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ctxopt/linalg.hpp"
#include "ctxopt/rng.hpp"

namespace ctxopt {

struct InsufficientCandidates : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Strategy parameters of the covariance matrix adaptation evolution
/// strategy. default_hyperparams() fills in the recommended settings for a
/// given dimension.
struct CmaHyperParams {
  int lambda = 0;      // population size
  int mu = 0;          // number of parents
  Vector weights;      // positive recombination weights, descending, sum 1
  double mu_eff = 0;   // 1 / sum(w_i^2)
  double c_sigma = 0;  // step-size path accumulation rate
  double d_sigma = 0;  // step-size damping
  double c_c = 0;      // covariance path accumulation rate
  double c_1 = 0;      // rank-one learning rate
  double c_mu = 0;     // rank-mu learning rate
  double c_m = 1.0;    // mean learning rate
};

CmaHyperParams default_hyperparams(int n);

/// sqrt(n) * (1 - 1/(4n) + 1/(21 n^2)), the expected norm of an
/// n-dimensional standard normal vector.
double chi_n(int n);

/// Search distribution N(mean, sigma^2 * cov) plus the evolution paths and
/// iteration counter that drive its adaptation.
struct DistributionState {
  Vector mean;
  Matrix cov;
  double sigma = 1.0;
  Vector p_sigma;
  Vector p_c;
  int t = 0;
  long eval_count = 0;

  static DistributionState initial(Vector mean, double sigma, Matrix cov);
  Eigen::Index dim() const { return mean.size(); }
};

/// One sampled solution: x = mean + sigma * y, y = sqrt(cov) * z.
struct Candidate {
  Vector z;
  Vector y;
  Vector x;
  double fitness = std::numeric_limits<double>::quiet_NaN();
};

std::vector<Candidate> sample_candidates(const DistributionState& state,
                                         int count, Rng& rng);
std::vector<Candidate> sample_population(const DistributionState& state,
                                         const CmaHyperParams& hp, Rng& rng);

/// Sort candidates by fitness ascending, stable. Non-finite fitness values
/// rank worst and keep their relative order.
void rank_candidates(std::vector<Candidate>& candidates);

/// One full adaptation step from a ranked population (best first):
/// evolution paths, mean, covariance (rank-mu plus rank-one, with the stall
/// compensation term when the step-size path is long), and step-size.
DistributionState update(const DistributionState& state,
                         const CmaHyperParams& hp,
                         const std::vector<Candidate>& ranked);

/// True when sigma^2 * lambda_max(cov) < 1e-10 and the distribution can no
/// longer make progress at a meaningful scale.
bool should_restart(const DistributionState& state);

/// On restart the mean is redrawn uniformly from [mean_lo, mean_hi]^n, the
/// step-size is reset to its value at the start of the run, cov to identity
/// and both paths to zero. Best-so-far and the evaluation count persist.
struct RestartPolicy {
  bool enabled = true;
  double mean_lo = -1.0;
  double mean_hi = 1.0;
};

struct RunResult {
  Vector best_x;
  double best_f = std::numeric_limits<double>::infinity();
  long evals_used = 0;
  std::vector<std::pair<long, double>> history;  // (eval count, best f)
  int restarts = 0;
  bool success = false;
};

using Objective = std::function<double(const Vector&)>;

/// Minimize the objective until best < target or the evaluation budget is
/// exhausted. If the remaining budget cannot fill a generation, the leftover
/// evaluations still update best-so-far but skip the distribution update.
RunResult optimize(const Objective& objective, const DistributionState& init,
                   const CmaHyperParams& hp, long budget, double target,
                   const RestartPolicy& restart_policy, Rng& rng);

}  // namespace ctxopt
