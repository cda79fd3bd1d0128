#include "ctxopt/serialize.hpp"

#include <fstream>

#include <json.hpp>

namespace ctxopt {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index cols_hint = -1) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = cols_hint;
  if (rows > 0) cols = static_cast<Eigen::Index>(j.at(0).size());
  if (cols < 0) cols = 0;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = j.at(static_cast<std::size_t>(i))
                    .at(static_cast<std::size_t>(c))
                    .get<double>();
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  json j;
  in >> j;
  return j;
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
}

json dataset_to_json(const ContextDataset& data) {
  json meta = json::array();
  for (const auto& m : data.meta)
    meta.push_back({{"best_f", m.best_f}, {"evals_used", m.evals_used}});
  return {{"contexts", matrix_to_json(data.contexts)},
          {"solutions", matrix_to_json(data.solutions)},
          {"meta", std::move(meta)}};
}

ContextDataset dataset_from_json(const json& j) {
  ContextDataset data;
  data.contexts = matrix_from_json(j.at("contexts"));
  data.solutions = matrix_from_json(j.at("solutions"));
  for (const auto& m : j.at("meta"))
    data.meta.push_back(
        {m.at("best_f").get<double>(), m.at("evals_used").get<long>()});
  if (data.solutions.rows() != data.contexts.rows() ||
      static_cast<Eigen::Index>(data.meta.size()) != data.contexts.rows())
    throw std::runtime_error("dataset file: inconsistent pair counts");
  return data;
}

std::string kernel_kind_name(KernelKind kind) {
  switch (kind) {
    case KernelKind::Linear:
      return "linear";
    case KernelKind::Rbf:
      return "rbf";
    case KernelKind::Matern52:
      return "matern52";
  }
  throw std::logic_error("unknown kernel kind");
}

KernelKind kernel_kind_from_name(const std::string& name) {
  if (name == "linear") return KernelKind::Linear;
  if (name == "rbf") return KernelKind::Rbf;
  if (name == "matern52") return KernelKind::Matern52;
  throw std::runtime_error("unknown kernel kind: " + name);
}

}  // namespace

std::string base_name(BaseFunction base) {
  switch (base) {
    case BaseFunction::Sphere:
      return "sphere";
    case BaseFunction::Rosenbrock:
      return "rosenbrock";
    case BaseFunction::Easom:
      return "easom";
  }
  throw std::logic_error("unknown base function");
}

BaseFunction base_from_name(const std::string& name) {
  if (name == "sphere") return BaseFunction::Sphere;
  if (name == "rosenbrock") return BaseFunction::Rosenbrock;
  if (name == "easom") return BaseFunction::Easom;
  throw std::runtime_error("unknown base function: " + name);
}

std::string shift_name(ShiftType shift) {
  switch (shift) {
    case ShiftType::Linear:
      return "linear";
    case ShiftType::Nonlinear:
      return "nonlinear";
    case ShiftType::Noisy:
      return "noisy";
  }
  throw std::logic_error("unknown shift type");
}

ShiftType shift_from_name(const std::string& name) {
  if (name == "linear") return ShiftType::Linear;
  if (name == "nonlinear") return ShiftType::Nonlinear;
  if (name == "noisy") return ShiftType::Noisy;
  throw std::runtime_error("unknown shift type: " + name);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  ExperimentConfig cfg = default_config(
      base_from_name(j.at("base").get<std::string>()),
      shift_from_name(j.at("shift").get<std::string>()));

  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("n_alpha")) cfg.n_alpha = j.at("n_alpha").get<int>();
  if (j.contains("m_prev")) cfg.m_prev = j.at("m_prev").get<int>();
  if (j.contains("preopt_budget"))
    cfg.preopt_budget = j.at("preopt_budget").get<long>();
  if (j.contains("run_budget")) cfg.run_budget = j.at("run_budget").get<long>();
  if (j.contains("target")) cfg.target = j.at("target").get<double>();
  if (j.contains("trials")) cfg.trials = j.at("trials").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("sigma0")) cfg.sigma0 = j.at("sigma0").get<double>();
  if (j.contains("sigma_min")) cfg.sigma_min = j.at("sigma_min").get<double>();
  if (j.contains("sigma_max")) cfg.sigma_max = j.at("sigma_max").get<double>();
  if (j.contains("ws_gamma")) cfg.ws_gamma = j.at("ws_gamma").get<double>();
  if (j.contains("ws_alpha")) cfg.ws_alpha = j.at("ws_alpha").get<double>();
  if (j.contains("fit_restarts"))
    cfg.fit.restarts = j.at("fit_restarts").get<int>();
  if (j.contains("fit_generations"))
    cfg.fit.generations = j.at("fit_generations").get<int>();
  if (j.contains("methods"))
    cfg.methods = j.at("methods").get<std::vector<std::string>>();

  if (cfg.n < 1 || cfg.n_alpha < 1)
    throw std::runtime_error("config: dimensions must be positive");
  if (cfg.trials < 1) throw std::runtime_error("config: trials must be >= 1");
  if (cfg.base == BaseFunction::Easom && cfg.n != 2)
    throw std::runtime_error("config: easom requires n = 2");
  for (const auto& m : cfg.methods)
    if (!is_known_method(m))
      throw std::runtime_error("config: unknown method '" + m + "'");
  return cfg;
}

std::string config_to_json_string(const ExperimentConfig& cfg) {
  const json j = {{"base", base_name(cfg.base)},
                  {"shift", shift_name(cfg.shift)},
                  {"n", cfg.n},
                  {"n_alpha", cfg.n_alpha},
                  {"m_prev", cfg.m_prev},
                  {"preopt_budget", cfg.preopt_budget},
                  {"run_budget", cfg.run_budget},
                  {"target", cfg.target},
                  {"trials", cfg.trials},
                  {"seed", cfg.seed},
                  {"sigma0", cfg.sigma0},
                  {"sigma_min", cfg.sigma_min},
                  {"sigma_max", cfg.sigma_max},
                  {"ws_gamma", cfg.ws_gamma},
                  {"ws_alpha", cfg.ws_alpha},
                  {"fit_restarts", cfg.fit.restarts},
                  {"fit_generations", cfg.fit.generations},
                  {"methods", cfg.methods}};
  return j.dump(2);
}

void save_dataset(const std::filesystem::path& path,
                  const ExperimentConfig& config, const Matrix& shift_matrix,
                  const ContextDataset& data) {
  const json j = {{"base", base_name(config.base)},
                  {"shift", shift_name(config.shift)},
                  {"n", config.n},
                  {"n_alpha", config.n_alpha},
                  {"seed", config.seed},
                  {"shift_matrix", matrix_to_json(shift_matrix)},
                  {"dataset", dataset_to_json(data)}};
  write_json_file(path, j);
}

LoadedDataset load_dataset(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  LoadedDataset out;
  out.shift_matrix = matrix_from_json(j.at("shift_matrix"));
  out.data = dataset_from_json(j.at("dataset"));
  return out;
}

void save_model(const std::filesystem::path& path, const MogprModel& model) {
  json kernels = json::array();
  for (const auto& k : model.kernels)
    kernels.push_back({{"kind", kernel_kind_name(k.kind)},
                       {"variance", k.variance},
                       {"length_scales", vector_to_json(k.length_scales)}});
  json coreg = json::array();
  for (const auto& b : model.coreg)
    coreg.push_back({{"a", vector_to_json(b.a)}, {"kappa", b.kappa}});

  const json j = {{"kernels", std::move(kernels)},
                  {"coregionalization", std::move(coreg)},
                  {"output_center", vector_to_json(model.output_center)},
                  {"jitter", model.jitter},
                  {"fit_seed", model.fit_seed},
                  {"dataset", dataset_to_json(model.data)}};
  write_json_file(path, j);
}

MogprModel load_model(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  ContextDataset data = dataset_from_json(j.at("dataset"));

  std::vector<KernelParams> kernels;
  for (const auto& k : j.at("kernels"))
    kernels.push_back({kernel_kind_from_name(k.at("kind").get<std::string>()),
                       k.at("variance").get<double>(),
                       vector_from_json(k.at("length_scales"))});
  std::vector<Coregionalization> coreg;
  for (const auto& b : j.at("coregionalization"))
    coreg.push_back(
        {vector_from_json(b.at("a")), b.at("kappa").get<double>()});

  MogprModel model =
      make_model(std::move(data), std::move(kernels), std::move(coreg));
  model.fit_seed = j.at("fit_seed").get<std::uint64_t>();
  return model;
}

void save_policy(const std::filesystem::path& path, const LinearPolicy& policy,
                 std::uint64_t seed) {
  const json j = {{"A", matrix_to_json(policy.A)},
                  {"sigma", policy.sigma},
                  {"C", matrix_to_json(policy.C)},
                  {"seed", seed}};
  write_json_file(path, j);
}

LinearPolicy load_policy(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  return {matrix_from_json(j.at("A")), j.at("sigma").get<double>(),
          matrix_from_json(j.at("C"))};
}

}  // namespace ctxopt
