// Command-line driver: pre-optimization, GP fitting, warm-started runs,
// method comparisons and dataset-size ablations, all seeded and CSV-backed.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ctxopt/harness.hpp"
#include "ctxopt/serialize.hpp"

namespace fs = std::filesystem;
using namespace ctxopt;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = "runs";
  std::string dataset_path;
  std::string model_path;
  std::string policy_path;
  std::string method = "cws";
  std::vector<int> m_values = {5, 10, 15, 20};
  std::uint64_t seed = 0;
  bool seed_given = false;
  int parallel = 1;
};

ExperimentConfig effective_config(const CliOptions& opt) {
  ExperimentConfig cfg = load_config(opt.config_path);
  if (opt.seed_given) cfg.seed = opt.seed;
  return cfg;
}

bool needs_dataset(const std::string& method) {
  return method == "cws" || method == "wscma" || method == "ccmaes-approx";
}

fs::path resolve_dataset_path(const CliOptions& opt) {
  if (!opt.dataset_path.empty()) return opt.dataset_path;
  return fs::path(opt.out_dir) / "dataset.json";
}

LoadedDataset require_dataset(const CliOptions& opt) {
  const fs::path path = resolve_dataset_path(opt);
  if (!fs::exists(path))
    throw MissingDataset("no dataset at " + path.string() +
                         "; run `ctxopt preopt` first or pass --dataset");
  return load_dataset(path);
}

void print_summary(const std::vector<TrialRecord>& records) {
  std::printf("%-14s %7s %8s %14s %14s %12s\n", "method", "trials", "success",
              "median-evals", "median-best-f", "setup-evals");
  for (const auto& s : summarize(records))
    std::printf("%-14s %7d %8d %14.0f %14.3e %12.0f\n", s.method.c_str(),
                s.trials, s.successes, s.median_evals, s.median_best_f,
                s.median_setup_evals);
}

int cmd_preopt(const CliOptions& opt) {
  const ExperimentConfig cfg = effective_config(opt);
  const Matrix g = shift_matrix_for(cfg);
  const ContextDataset data = preoptimize(cfg, g);
  fs::create_directories(opt.out_dir);
  const fs::path path = fs::path(opt.out_dir) / "dataset.json";
  save_dataset(path, cfg, g, data);
  std::printf("wrote %s (%d tasks)\n", path.string().c_str(), cfg.m_prev);
  for (Eigen::Index i = 0; i < data.size(); ++i)
    std::printf("  task %2ld: best_f %.3e  evals %ld\n", static_cast<long>(i),
                data.meta[static_cast<std::size_t>(i)].best_f,
                data.meta[static_cast<std::size_t>(i)].evals_used);
  return 0;
}

int cmd_fit_gp(const CliOptions& opt) {
  const ExperimentConfig cfg = effective_config(opt);
  const LoadedDataset loaded = require_dataset(opt);
  const MogprModel model = fit_gp(cfg, loaded.data);
  fs::create_directories(opt.out_dir);
  const fs::path path = fs::path(opt.out_dir) / "model.json";
  save_model(path, model);
  std::printf("wrote %s (log marginal likelihood %.6f)\n",
              path.string().c_str(), log_marginal_likelihood(model));
  return 0;
}

struct Artifacts {
  Matrix g;
  std::optional<ContextDataset> data;
  std::optional<MogprModel> model;
  std::optional<LinearPolicy> policy;
};

/// Load or create whatever the requested methods need, caching the results
/// under the output directory.
Artifacts ensure_artifacts(const CliOptions& opt, const ExperimentConfig& cfg,
                           const std::vector<std::string>& methods,
                           bool allow_preopt) {
  Artifacts art;
  art.g = shift_matrix_for(cfg);

  const bool any_dataset = std::any_of(methods.begin(), methods.end(),
                                       [](const auto& m) { return needs_dataset(m); });
  if (any_dataset) {
    const fs::path path = resolve_dataset_path(opt);
    if (fs::exists(path)) {
      LoadedDataset loaded = load_dataset(path);
      art.g = std::move(loaded.shift_matrix);
      art.data = std::move(loaded.data);
    } else if (allow_preopt) {
      std::printf("no dataset at %s; pre-optimizing %d tasks\n",
                  path.string().c_str(), cfg.m_prev);
      art.data = preoptimize(cfg, art.g);
      fs::create_directories(opt.out_dir);
      save_dataset(path, cfg, art.g, *art.data);
    } else {
      throw MissingDataset("no dataset at " + path.string() +
                           "; run `ctxopt preopt` first or pass --dataset");
    }
  }

  const bool any_cws = std::find(methods.begin(), methods.end(), "cws") !=
                       methods.end();
  if (any_cws) {
    const fs::path path = opt.model_path.empty()
                              ? fs::path(opt.out_dir) / "model.json"
                              : fs::path(opt.model_path);
    if (fs::exists(path)) {
      art.model = load_model(path);
    } else {
      if (!opt.model_path.empty())
        throw MissingDataset("no model at " + path.string());
      std::printf("no model at %s; fitting\n", path.string().c_str());
      art.model = fit_gp(cfg, *art.data);
      fs::create_directories(opt.out_dir);
      save_model(path, *art.model);
    }
  }

  const bool any_policy = std::find(methods.begin(), methods.end(),
                                    "ccmaes-approx") != methods.end();
  if (any_policy) {
    const fs::path path = opt.policy_path.empty()
                              ? fs::path(opt.out_dir) / "policy.json"
                              : fs::path(opt.policy_path);
    if (fs::exists(path)) {
      art.policy = load_policy(path);
    } else {
      if (!opt.policy_path.empty())
        throw MissingPolicy("no policy at " + path.string());
      std::printf("no policy at %s; training (budget %ld)\n",
                  path.string().c_str(),
                  static_cast<long>(cfg.m_prev) * cfg.preopt_budget);
      art.policy = train_policy(cfg, art.g);
      fs::create_directories(opt.out_dir);
      save_policy(path, *art.policy, cfg.seed);
    }
  }
  return art;
}

int cmd_run(const CliOptions& opt) {
  const ExperimentConfig cfg = effective_config(opt);
  const Artifacts art = ensure_artifacts(opt, cfg, {opt.method}, false);

  const auto records = run_trials(
      cfg, {opt.method}, art.g, art.data ? &*art.data : nullptr,
      art.model ? &*art.model : nullptr, art.policy ? &*art.policy : nullptr,
      opt.parallel);

  fs::create_directories(opt.out_dir);
  for (const auto& r : records) {
    const fs::path path =
        fs::path(opt.out_dir) / ("trial_" + std::to_string(r.trial) + ".csv");
    write_trial_csv(path, r);
  }
  std::printf("wrote %zu trial files to %s\n", records.size(),
              opt.out_dir.c_str());
  print_summary(records);
  return 0;
}

int cmd_compare(const CliOptions& opt) {
  const ExperimentConfig cfg = effective_config(opt);
  const Artifacts art = ensure_artifacts(opt, cfg, cfg.methods, true);

  const ComparisonResult result = compare(
      cfg, art.g, art.data ? &*art.data : nullptr,
      art.model ? &*art.model : nullptr, art.policy ? &*art.policy : nullptr,
      opt.parallel);

  fs::create_directories(opt.out_dir);
  write_results_csv(fs::path(opt.out_dir) / "results.csv", result.records);
  write_curves_csv(fs::path(opt.out_dir) / "curves.csv", result.curves);
  std::printf("wrote %s and %s\n",
              (fs::path(opt.out_dir) / "results.csv").string().c_str(),
              (fs::path(opt.out_dir) / "curves.csv").string().c_str());
  print_summary(result.records);
  return 0;
}

int cmd_ablate(const CliOptions& opt) {
  const ExperimentConfig cfg = effective_config(opt);
  const ComparisonResult result =
      ablate_mprev(cfg, opt.m_values, opt.parallel);

  fs::create_directories(opt.out_dir);
  write_results_csv(fs::path(opt.out_dir) / "ablation_results.csv",
                    result.records);
  write_curves_csv(fs::path(opt.out_dir) / "ablation_curves.csv",
                   result.curves);
  std::printf("wrote %s and %s\n",
              (fs::path(opt.out_dir) / "ablation_results.csv").string().c_str(),
              (fs::path(opt.out_dir) / "ablation_curves.csv").string().c_str());
  print_summary(result.records);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual black-box optimization toolkit"};
  app.require_subcommand(1);

  CliOptions opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "experiment config (JSON)")
        ->required();
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--seed", opt.seed, "master seed override")
        ->each([&](const std::string&) { opt.seed_given = true; });
  };

  auto* preopt = app.add_subcommand(
      "preopt", "solve the training tasks and write dataset.json");
  add_common(preopt);

  auto* fitgp = app.add_subcommand(
      "fit-gp", "fit the multi-output GP on a dataset and write model.json");
  add_common(fitgp);
  fitgp->add_option("--dataset", opt.dataset_path, "dataset file");

  auto* run = app.add_subcommand(
      "run", "run one method over the configured trials");
  add_common(run);
  run->add_option("--method", opt.method, "method to run")
      ->required()
      ->check(CLI::IsMember(known_methods()));
  run->add_option("--dataset", opt.dataset_path, "dataset file");
  run->add_option("--model", opt.model_path, "fitted GP model file");
  run->add_option("--policy", opt.policy_path, "trained policy file");
  run->add_option("--parallel", opt.parallel, "concurrent trials")
      ->check(CLI::PositiveNumber);

  auto* comparec = app.add_subcommand(
      "compare", "run all configured methods and write results/curves CSVs");
  add_common(comparec);
  comparec->add_option("--dataset", opt.dataset_path, "dataset file");
  comparec->add_option("--parallel", opt.parallel, "concurrent trials")
      ->check(CLI::PositiveNumber);

  auto* ablate = app.add_subcommand(
      "ablate", "sweep the number of pre-optimized tasks");
  add_common(ablate);
  ablate->add_option("--m-values", opt.m_values, "dataset sizes to sweep");
  ablate->add_option("--parallel", opt.parallel, "concurrent trials")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (preopt->parsed()) return cmd_preopt(opt);
    if (fitgp->parsed()) return cmd_fit_gp(opt);
    if (run->parsed()) return cmd_run(opt);
    if (comparec->parsed()) return cmd_compare(opt);
    if (ablate->parsed()) return cmd_ablate(opt);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
