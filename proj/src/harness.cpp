#include "ctxopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace ctxopt {

namespace {

std::string trial_scope(int trial) { return "trial/" + std::to_string(trial); }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

ExperimentConfig default_config(BaseFunction base, ShiftType shift) {
  ExperimentConfig cfg;
  cfg.base = base;
  cfg.shift = shift;
  cfg.n = default_dimension(base);
  cfg.preopt_budget = default_budget(base);
  cfg.run_budget = default_budget(base);
  return cfg;
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> methods = {"cws", "cold", "wscma",
                                                   "ccmaes-approx"};
  return methods;
}

bool is_known_method(const std::string& method) {
  const auto& all = known_methods();
  return std::find(all.begin(), all.end(), method) != all.end();
}

Matrix shift_matrix_for(const ExperimentConfig& config) {
  Rng rng = Rng::from_label(config.seed, "G");
  return sample_shift_matrix(rng, config.n, config.n_alpha);
}

ContextDataset preoptimize(const ExperimentConfig& config, const Matrix& g) {
  return preoptimize(config, g, config.m_prev);
}

ContextDataset preoptimize(const ExperimentConfig& config, const Matrix& g,
                           int m_prev) {
  if (m_prev < 0)
    throw std::invalid_argument("preoptimize: m_prev must be >= 0");

  ContextDataset data;
  data.contexts.resize(m_prev, config.n_alpha);
  data.solutions.resize(m_prev, config.n);
  data.meta.resize(m_prev);

  const CmaHyperParams hp = default_hyperparams(config.n);
  const std::vector<std::pair<double, double>> ranges(
      config.n_alpha, config.context_range);

  for (int i = 0; i < m_prev; ++i) {
    Rng ctx_rng = Rng::from_label(config.seed, "preopt/ctx/" + std::to_string(i));
    const Vector alpha = sample_context(ctx_rng, ranges);

    Vector noise;
    if (config.shift == ShiftType::Noisy) {
      Rng noise_rng =
          Rng::from_label(config.seed, "preopt/noise/" + std::to_string(i));
      noise = noise_rng.normal_vector(config.n);
    }
    ContextualObjective task(config.base, config.shift, g, alpha, noise);

    Rng opt_rng =
        Rng::from_label(config.seed, "preopt/task/" + std::to_string(i));
    const Vector m0 = opt_rng.uniform_vector(
        config.n, config.init_mean_range.first, config.init_mean_range.second);
    const auto init = DistributionState::initial(
        m0, config.sigma0, Matrix::Identity(config.n, config.n));
    const RestartPolicy restart{true, config.init_mean_range.first,
                                config.init_mean_range.second};
    const RunResult run =
        optimize([&task](const Vector& x) { return task(x); }, init, hp,
                 config.preopt_budget, config.target, restart, opt_rng);

    data.contexts.row(i) = alpha.transpose();
    data.solutions.row(i) = run.best_x.transpose();
    data.meta[static_cast<std::size_t>(i)] = {run.best_f, run.evals_used};
  }
  return data;
}

MogprModel fit_gp(const ExperimentConfig& config, const ContextDataset& data) {
  if (data.size() < 1)
    throw MissingDataset("fit_gp: dataset is empty; run pre-optimization first");
  Rng rng = Rng::from_label(config.seed, "fitgp");
  MogprModel model = fit(data, config.fit, rng);
  model.fit_seed = config.seed;
  return model;
}

LinearPolicy train_policy(const ExperimentConfig& config, const Matrix& g) {
  Rng rng = Rng::from_label(config.seed, "ccmaes/train");
  Rng noise_rng = Rng::from_label(config.seed, "ccmaes/noise");

  const int n = config.n;
  auto objective = [&](const Vector& x, const Vector& alpha) {
    Vector noise = Vector::Zero(n);
    if (config.shift == ShiftType::Noisy) noise = noise_rng.normal_vector(n);
    return base_eval(config.base,
                     apply_shift(config.shift, x, alpha, g, noise, 0.25));
  };
  auto sampler = [&](Rng& r) {
    return r.uniform_vector(config.n_alpha, config.context_range.first,
                            config.context_range.second);
  };
  const long budget = static_cast<long>(config.m_prev) * config.preopt_budget;
  return ccmaes_baseline_train(objective, sampler, n, config.n_alpha, budget,
                               rng);
}

TrialRecord run_method(const ExperimentConfig& config,
                       const std::string& method, const Matrix& g,
                       const Vector& alpha_new, const Vector& noise,
                       const ContextDataset* data, const MogprModel* model,
                       const LinearPolicy* policy,
                       const std::string& rng_scope) {
  ContextualObjective task(config.base, config.shift, g, alpha_new, noise);
  const CmaHyperParams hp = default_hyperparams(config.n);
  const RestartPolicy restart{true, config.init_mean_range.first,
                              config.init_mean_range.second};
  const Objective objective = [&task](const Vector& x) { return task(x); };

  TrialRecord record;
  record.method = method;

  auto finish_with = [&](const RunResult& run, long setup_evals) {
    record.best_f = run.best_f;
    record.success = run.success;
    record.evals_to_target = run.success ? run.evals_used : config.run_budget;
    record.setup_evals = setup_evals;
    record.trace = run.history;
  };

  if (method == "cold") {
    Rng rng = Rng::from_label(config.seed, rng_scope + "/cold");
    const Vector m0 = rng.uniform_vector(
        config.n, config.init_mean_range.first, config.init_mean_range.second);
    const auto init = DistributionState::initial(
        m0, config.sigma0, Matrix::Identity(config.n, config.n));
    finish_with(optimize(objective, init, hp, config.run_budget, config.target,
                         restart, rng),
                0);
  } else if (method == "cws") {
    if (model == nullptr)
      throw MissingDataset("run_method: cws needs a fitted model");
    const DistributionInit warm =
        cws_init(*model, alpha_new, config.sigma_min, config.sigma_max);
    Rng rng = Rng::from_label(config.seed, rng_scope + "/cws");
    const auto init =
        DistributionState::initial(warm.m0, warm.sigma0, warm.C0);
    finish_with(optimize(objective, init, hp, config.run_budget, config.target,
                         restart, rng),
                0);
  } else if (method == "wscma") {
    if (data == nullptr || data->size() < 1)
      throw MissingDataset("run_method: wscma needs a pre-optimized dataset");
    const std::size_t similar = select_similar_task(*data, alpha_new);
    Vector source_noise;
    if (config.shift == ShiftType::Noisy) {
      Rng noise_rng =
          Rng::from_label(config.seed, rng_scope + "/wssrc_noise");
      source_noise = noise_rng.normal_vector(config.n);
    }
    ContextualObjective source_task(
        config.base, config.shift, g,
        data->context(static_cast<Eigen::Index>(similar)), source_noise);

    Rng src_rng = Rng::from_label(config.seed, rng_scope + "/wssrc");
    const long source_count = config.preopt_budget;
    std::vector<ScoredSolution> solutions(
        static_cast<std::size_t>(source_count));
    for (auto& s : solutions) {
      s.x = src_rng.uniform_vector(config.n, config.ws_solution_range.first,
                                   config.ws_solution_range.second);
      s.fitness = source_task(s.x);
    }
    const DistributionInit warm =
        ws_cmaes_init(solutions, config.ws_gamma, config.ws_alpha);
    Rng rng = Rng::from_label(config.seed, rng_scope + "/wscma");
    const auto init =
        DistributionState::initial(warm.m0, warm.sigma0, warm.C0);
    finish_with(optimize(objective, init, hp, config.run_budget, config.target,
                         restart, rng),
                source_count);
  } else if (method == "ccmaes-approx") {
    if (policy == nullptr)
      throw MissingPolicy("run_method: ccmaes-approx needs a trained policy");
    // The policy answers directly; no optimization for the target context.
    const double f = task(policy_predict(*policy, alpha_new));
    record.best_f = f;
    record.success = f < config.target;
    record.evals_to_target = record.success ? 1 : config.run_budget;
    record.setup_evals = 0;
    record.trace = {{1, f}};
  } else {
    throw std::invalid_argument("run_method: unknown method '" + method + "'");
  }
  return record;
}

TrialRecord run_trial(const ExperimentConfig& config, const std::string& method,
                      const Matrix& g, const ContextDataset* data,
                      const MogprModel* model, const LinearPolicy* policy,
                      int trial) {
  const std::string scope = trial_scope(trial);
  Rng alpha_rng = Rng::from_label(config.seed, scope + "/alpha");
  const std::vector<std::pair<double, double>> ranges(
      config.n_alpha, config.context_range);
  const Vector alpha_new = sample_context(alpha_rng, ranges);

  Vector noise;
  if (config.shift == ShiftType::Noisy) {
    Rng noise_rng = Rng::from_label(config.seed, scope + "/noise");
    noise = noise_rng.normal_vector(config.n);
  }
  TrialRecord record = run_method(config, method, g, alpha_new, noise, data,
                                  model, policy, scope);
  record.trial = trial;
  return record;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config,
                                    const std::vector<std::string>& methods,
                                    const Matrix& g, const ContextDataset* data,
                                    const MogprModel* model,
                                    const LinearPolicy* policy, int parallel) {
  const int trials = config.trials;
  std::vector<TrialRecord> records(
      static_cast<std::size_t>(trials) * methods.size());

  auto run_one_trial = [&](int t) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
      records[static_cast<std::size_t>(t) * methods.size() + mi] =
          run_trial(config, methods[mi], g, data, model, policy, t);
  };

  const int workers = std::max(1, std::min(parallel, trials));
  if (workers == 1) {
    for (int t = 0; t < trials; ++t) run_one_trial(t);
    return records;
  }

  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
        try {
          run_one_trial(t);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return records;
}

std::vector<long> checkpoint_grid(long lambda, long budget) {
  if (lambda < 1 || budget < lambda)
    throw std::invalid_argument("checkpoint_grid: budget must cover lambda");
  std::vector<long> grid;
  for (long e = lambda; e < budget; e += lambda) grid.push_back(e);
  grid.push_back(budget);
  return grid;
}

double trace_value_at(const TrialRecord& record, long evals) {
  double value = std::numeric_limits<double>::infinity();
  for (const auto& [e, f] : record.trace) {
    if (e > evals) break;
    value = f;
  }
  return value;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty())
    throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double h =
      std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  const double w = h - std::floor(h);
  return (1.0 - w) * values[lo] + w * values[hi];
}

std::vector<CurveRow> make_curves(const std::vector<TrialRecord>& records,
                                  const std::vector<long>& grid) {
  std::vector<std::string> methods;
  for (const auto& r : records)
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);

  std::vector<CurveRow> rows;
  for (const auto& method : methods) {
    for (long e : grid) {
      std::vector<double> values;
      for (const auto& r : records)
        if (r.method == method) values.push_back(trace_value_at(r, e));
      rows.push_back({method, e, quantile(values, 0.5), quantile(values, 0.25),
                      quantile(values, 0.75)});
    }
  }
  return rows;
}

std::vector<MethodSummary> summarize(const std::vector<TrialRecord>& records) {
  std::vector<std::string> methods;
  for (const auto& r : records)
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end())
      methods.push_back(r.method);

  std::vector<MethodSummary> out;
  for (const auto& method : methods) {
    MethodSummary s;
    s.method = method;
    std::vector<double> evals, best, setup;
    for (const auto& r : records) {
      if (r.method != method) continue;
      ++s.trials;
      if (r.success) ++s.successes;
      evals.push_back(static_cast<double>(r.evals_to_target));
      best.push_back(r.best_f);
      setup.push_back(static_cast<double>(r.setup_evals));
    }
    s.median_evals = quantile(evals, 0.5);
    s.median_best_f = quantile(best, 0.5);
    s.median_setup_evals = quantile(setup, 0.5);
    out.push_back(std::move(s));
  }
  return out;
}

void write_results_csv(const std::filesystem::path& path,
                       const std::vector<TrialRecord>& records) {
  auto out = open_out(path);
  out << "trial,method,evals,best_f\n";
  for (const auto& r : records)
    out << r.trial << ',' << r.method << ',' << r.evals_to_target << ','
        << format_double(r.best_f) << '\n';
}

void write_curves_csv(const std::filesystem::path& path,
                      const std::vector<CurveRow>& rows) {
  auto out = open_out(path);
  out << "method,evals,median_f,q1_f,q3_f\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.evals << ',' << format_double(r.median_f)
        << ',' << format_double(r.q1_f) << ',' << format_double(r.q3_f)
        << '\n';
}

void write_trial_csv(const std::filesystem::path& path,
                     const TrialRecord& record) {
  auto out = open_out(path);
  out << "evals,best_f\n";
  for (const auto& [e, f] : record.trace)
    out << e << ',' << format_double(f) << '\n';
}

ComparisonResult compare(const ExperimentConfig& config, const Matrix& g,
                         const ContextDataset* data, const MogprModel* model,
                         const LinearPolicy* policy, int parallel) {
  ComparisonResult result;
  result.records = run_trials(config, config.methods, g, data, model, policy,
                              parallel);
  const auto grid =
      checkpoint_grid(default_hyperparams(config.n).lambda, config.run_budget);
  result.curves = make_curves(result.records, grid);
  return result;
}

ComparisonResult ablate_mprev(const ExperimentConfig& config,
                              const std::vector<int>& m_values, int parallel) {
  if (m_values.empty())
    throw std::invalid_argument("ablate_mprev: no dataset sizes given");

  const Matrix g = shift_matrix_for(config);
  const auto grid =
      checkpoint_grid(default_hyperparams(config.n).lambda, config.run_budget);

  ComparisonResult result;
  auto append = [&](std::vector<TrialRecord> records) {
    const auto curves = make_curves(records, grid);
    result.records.insert(result.records.end(), records.begin(), records.end());
    result.curves.insert(result.curves.end(), curves.begin(), curves.end());
  };

  append(run_trials(config, {"cold"}, g, nullptr, nullptr, nullptr, parallel));

  for (int m : m_values) {
    if (m <= 0) {
      std::cerr << "ablate: skipping m_prev=" << m
                << " (no pre-optimization data); baseline only\n";
      continue;
    }
    const ContextDataset data = preoptimize(config, g, m);
    const MogprModel model = fit_gp(config, data);
    auto records =
        run_trials(config, {"cws"}, g, &data, &model, nullptr, parallel);
    for (auto& r : records) r.method = "cws_m" + std::to_string(m);
    append(std::move(records));
  }
  return result;
}

}  // namespace ctxopt
