#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ctxopt/benchmarks.hpp"
#include "ctxopt/contextual.hpp"
#include "ctxopt/mogpr.hpp"

namespace ctxopt {

struct MissingDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingPolicy : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Full experiment description. One master seed drives every random choice
/// through labeled stream splitting, so a (seed, config) pair reproduces
/// byte-identical outputs.
struct ExperimentConfig {
  BaseFunction base = BaseFunction::Sphere;
  ShiftType shift = ShiftType::Linear;
  int n = 20;
  int n_alpha = 2;
  int m_prev = 10;
  long preopt_budget = 10000;
  long run_budget = 10000;
  double target = 1e-8;
  int trials = 20;
  std::uint64_t seed = 42;
  double sigma0 = 2.0;
  double sigma_min = 1e-2;
  double sigma_max = 2.0;
  double ws_gamma = 0.1;
  double ws_alpha = 0.1;
  FitConfig fit;
  std::vector<std::string> methods = {"cws", "cold", "wscma", "ccmaes-approx"};
  std::pair<double, double> context_range{-2.0, 2.0};
  std::pair<double, double> init_mean_range{-1.0, 1.0};
  std::pair<double, double> ws_solution_range{-2.0, 2.0};
};

ExperimentConfig default_config(BaseFunction base, ShiftType shift);

bool is_known_method(const std::string& method);
const std::vector<std::string>& known_methods();

struct TrialRecord {
  int trial = 0;
  std::string method;
  long evals_to_target = 0;  // run budget when the target was not reached
  bool success = false;
  double best_f = std::numeric_limits<double>::infinity();
  long setup_evals = 0;  // side evaluations (warm-start source sets)
  std::vector<std::pair<long, double>> trace;  // (eval count, best f)
};

/// Shift matrix shared by every task of the experiment.
Matrix shift_matrix_for(const ExperimentConfig& config);

/// Solve m_prev tasks at freshly sampled contexts and collect the
/// (context, best solution) pairs.
ContextDataset preoptimize(const ExperimentConfig& config, const Matrix& g);
ContextDataset preoptimize(const ExperimentConfig& config, const Matrix& g,
                           int m_prev);

MogprModel fit_gp(const ExperimentConfig& config, const ContextDataset& data);

LinearPolicy train_policy(const ExperimentConfig& config, const Matrix& g);

/// One optimization run for an explicit target context. rng_scope prefixes
/// the labels of every stream the run consumes.
TrialRecord run_method(const ExperimentConfig& config,
                       const std::string& method, const Matrix& g,
                       const Vector& alpha_new, const Vector& noise,
                       const ContextDataset* data, const MogprModel* model,
                       const LinearPolicy* policy,
                       const std::string& rng_scope);

/// Same, with the context and task noise drawn from the trial's streams.
TrialRecord run_trial(const ExperimentConfig& config, const std::string& method,
                      const Matrix& g, const ContextDataset* data,
                      const MogprModel* model, const LinearPolicy* policy,
                      int trial);

/// All (trial, method) runs; trials may execute concurrently. Records come
/// back sorted by trial then method order, independent of thread count.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config,
                                    const std::vector<std::string>& methods,
                                    const Matrix& g, const ContextDataset* data,
                                    const MogprModel* model,
                                    const LinearPolicy* policy,
                                    int parallel = 1);

/// Evaluation checkpoints lambda, 2*lambda, ... plus the budget itself.
std::vector<long> checkpoint_grid(long lambda, long budget);

/// Best value a trial had seen by the given evaluation count.
double trace_value_at(const TrialRecord& record, long evals);

struct CurveRow {
  std::string method;
  long evals = 0;
  double median_f = 0.0;
  double q1_f = 0.0;
  double q3_f = 0.0;
};

std::vector<CurveRow> make_curves(const std::vector<TrialRecord>& records,
                                  const std::vector<long>& grid);

/// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

struct MethodSummary {
  std::string method;
  int trials = 0;
  int successes = 0;
  double median_evals = 0.0;
  double median_best_f = 0.0;
  double median_setup_evals = 0.0;
};

std::vector<MethodSummary> summarize(const std::vector<TrialRecord>& records);

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<TrialRecord>& records);
void write_curves_csv(const std::filesystem::path& path,
                      const std::vector<CurveRow>& rows);
void write_trial_csv(const std::filesystem::path& path,
                     const TrialRecord& record);

struct ComparisonResult {
  std::vector<TrialRecord> records;
  std::vector<CurveRow> curves;
};

/// Run every configured method over the configured trial count.
ComparisonResult compare(const ExperimentConfig& config, const Matrix& g,
                         const ContextDataset* data, const MogprModel* model,
                         const LinearPolicy* policy, int parallel = 1);

/// Re-run pre-optimization and the warm-started method per dataset size,
/// next to the cold baseline. Warm-start curves are labeled cws_m<M>.
ComparisonResult ablate_mprev(const ExperimentConfig& config,
                              const std::vector<int>& m_values,
                              int parallel = 1);

}  // namespace ctxopt
