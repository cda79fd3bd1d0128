#include "ctxopt/mogpr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "ctxopt/cmaes.hpp"

namespace ctxopt {

namespace {

double scaled_sq_distance(const Vector& x, const Vector& xp,
                          const Vector& length_scales) {
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = (x[i] - xp[i]) / length_scales[i];
    r2 += d * d;
  }
  return r2;
}

Vector centered_stack(const ContextDataset& data, const Vector& center) {
  const Eigen::Index m = data.size();
  const Eigen::Index l = data.solution_dim();
  Vector g(m * l);
  for (Eigen::Index i = 0; i < m; ++i)
    g.segment(i * l, l) = data.solution(i) - center;
  return g;
}

Vector column_means(const Matrix& rows) {
  return rows.colwise().mean().transpose();
}

void check_kernel_dims(const std::vector<KernelParams>& kernels,
                       const std::vector<Coregionalization>& coreg,
                       Eigen::Index context_dim, Eigen::Index output_dim) {
  if (kernels.empty() || kernels.size() != coreg.size())
    throw std::invalid_argument("model: kernel/coregionalization counts disagree");
  for (const auto& k : kernels) {
    if (k.variance <= 0.0)
      throw std::invalid_argument("model: kernel variance must be positive");
    if (k.kind != KernelKind::Linear && k.length_scales.size() != context_dim)
      throw std::invalid_argument("model: length scale count must match context dim");
  }
  for (const auto& b : coreg) {
    if (b.kappa <= 0.0)
      throw std::invalid_argument("model: kappa must be positive");
    if (b.a.size() != output_dim)
      throw std::invalid_argument("model: coupling vector must match output dim");
  }
}

}  // namespace

double kernel_eval(const KernelParams& k, const Vector& x, const Vector& xp) {
  if (x.size() != xp.size())
    throw std::invalid_argument("kernel_eval: input dims disagree");
  switch (k.kind) {
    case KernelKind::Linear:
      return k.variance * x.dot(xp);
    case KernelKind::Rbf:
      return k.variance *
             std::exp(-0.5 * scaled_sq_distance(x, xp, k.length_scales));
    case KernelKind::Matern52: {
      const double r2 = scaled_sq_distance(x, xp, k.length_scales);
      const double r = std::sqrt(r2);
      const double sqrt5_r = std::sqrt(5.0) * r;
      return k.variance * (1.0 + sqrt5_r + (5.0 / 3.0) * r2) *
             std::exp(-sqrt5_r);
    }
  }
  throw std::logic_error("kernel_eval: unknown kernel kind");
}

Matrix kernel_matrix(const KernelParams& k, const Matrix& contexts) {
  const Eigen::Index m = contexts.rows();
  Matrix out(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Vector xi = contexts.row(i).transpose();
    out(i, i) = kernel_eval(k, xi, xi);
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double v = kernel_eval(k, xi, contexts.row(j).transpose());
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

Matrix build_gram(const ContextDataset& data,
                  const std::vector<KernelParams>& kernels,
                  const std::vector<Coregionalization>& coreg) {
  check_kernel_dims(kernels, coreg, data.context_dim(), data.solution_dim());
  const Eigen::Index l = data.solution_dim();
  const Eigen::Index m = data.size();
  Matrix gram = Matrix::Zero(m * l, m * l);
  for (std::size_t q = 0; q < kernels.size(); ++q)
    gram += kronecker(kernel_matrix(kernels[q], data.contexts),
                      coreg[q].matrix());
  return gram;
}

MogprModel make_model(ContextDataset data, std::vector<KernelParams> kernels,
                      std::vector<Coregionalization> coreg) {
  if (data.size() < 1)
    throw std::invalid_argument("make_model: dataset must not be empty");
  if (data.solutions.rows() != data.contexts.rows())
    throw std::invalid_argument("make_model: context/solution counts disagree");

  MogprModel model;
  model.output_center = column_means(data.solutions);
  const Matrix gram = build_gram(data, kernels, coreg);
  CholeskyResult factor;
  try {
    factor = cholesky(gram, default_jitter(gram));
  } catch (const NotPositiveDefinite& e) {
    throw SingularGram(e.what());
  }
  model.data = std::move(data);
  model.kernels = std::move(kernels);
  model.coreg = std::move(coreg);
  model.gram_factor = std::move(factor.L);
  model.jitter = factor.jitter;
  return model;
}

GaussianParams predict(const MogprModel& model, const Vector& alpha_new) {
  const Eigen::Index m = model.data.size();
  const Eigen::Index l = model.data.solution_dim();
  if (alpha_new.size() != model.data.context_dim())
    throw std::invalid_argument("predict: context dims disagree");

  Matrix k_star = Matrix::Zero(m * l, l);
  Matrix k_ss = Matrix::Zero(l, l);
  for (std::size_t q = 0; q < model.kernels.size(); ++q) {
    const Matrix b = model.coreg[q].matrix();
    for (Eigen::Index i = 0; i < m; ++i)
      k_star.block(i * l, 0, l, l) +=
          kernel_eval(model.kernels[q], model.data.context(i), alpha_new) * b;
    k_ss += kernel_eval(model.kernels[q], alpha_new, alpha_new) * b;
  }

  const Vector residual = centered_stack(model.data, model.output_center);
  const Vector mean =
      model.output_center +
      k_star.transpose() * cholesky_solve(model.gram_factor, residual);
  const Matrix half =
      model.gram_factor.triangularView<Eigen::Lower>().solve(k_star);
  const Matrix cov = symmetrized(k_ss - half.transpose() * half);
  return {mean, cov};
}

double log_marginal_likelihood(const MogprModel& model) {
  const Vector residual = centered_stack(model.data, model.output_center);
  const Vector half =
      model.gram_factor.triangularView<Eigen::Lower>().solve(residual);
  const double quad = half.squaredNorm();
  const double log_det = log_det_from_cholesky(model.gram_factor);
  return -0.5 * quad - 0.5 * log_det -
         0.5 * static_cast<double>(residual.size()) *
             std::log(2.0 * std::numbers::pi);
}

std::vector<KernelParams> default_kernels(Eigen::Index context_dim) {
  return {
      {KernelKind::Linear, 1.0, Vector()},
      {KernelKind::Rbf, 1.0, Vector::Ones(context_dim)},
      {KernelKind::Matern52, 1.0, Vector::Ones(context_dim)},
  };
}

std::vector<Coregionalization> default_coreg(Eigen::Index output_dim) {
  return {{Vector::Constant(output_dim, 0.5), 0.1},
          {Vector::Constant(output_dim, 0.5), 0.1},
          {Vector::Constant(output_dim, 0.5), 0.1}};
}

namespace {

// Hyperparameter search box. Scale and length parameters live in log space;
// coupling entries are raw.
constexpr double kLogScaleLo = -6.907755278982137;   // ln 1e-3
constexpr double kLogScaleHi = 4.605170185988092;    // ln 1e2
constexpr double kLogLengthLo = -4.605170185988091;  // ln 1e-2
constexpr double kLogLengthHi = 4.605170185988092;   // ln 1e2
constexpr double kCouplingLim = 10.0;
constexpr double kLogKappaLo = -13.815510557964274;  // ln 1e-6
constexpr double kLogKappaHi = 0.0;
constexpr double kFailedFitValue = 1e15;

struct ParamBox {
  std::vector<double> lo;
  std::vector<double> hi;

  void add(double l, double h) {
    lo.push_back(l);
    hi.push_back(h);
  }
  Eigen::Index size() const { return static_cast<Eigen::Index>(lo.size()); }
};

ParamBox make_box(Eigen::Index context_dim, Eigen::Index output_dim) {
  ParamBox box;
  for (int q = 0; q < 3; ++q) {
    box.add(kLogScaleLo, kLogScaleHi);
    if (q != 0)
      for (Eigen::Index d = 0; d < context_dim; ++d)
        box.add(kLogLengthLo, kLogLengthHi);
    for (Eigen::Index d = 0; d < output_dim; ++d)
      box.add(-kCouplingLim, kCouplingLim);
    box.add(kLogKappaLo, kLogKappaHi);
  }
  return box;
}

struct DecodedParams {
  std::vector<KernelParams> kernels;
  std::vector<Coregionalization> coreg;
  double penalty = 0.0;
};

DecodedParams decode(const Vector& u, const ParamBox& box,
                     Eigen::Index context_dim, Eigen::Index output_dim) {
  DecodedParams out;
  Eigen::Index pos = 0;
  auto next = [&](double& penalty) {
    const double raw = u[pos];
    const double clamped = std::clamp(raw, 0.0, 1.0);
    penalty += (raw - clamped) * (raw - clamped);
    const double v = box.lo[static_cast<std::size_t>(pos)] +
                     clamped * (box.hi[static_cast<std::size_t>(pos)] -
                                box.lo[static_cast<std::size_t>(pos)]);
    ++pos;
    return v;
  };

  const KernelKind kinds[3] = {KernelKind::Linear, KernelKind::Rbf,
                               KernelKind::Matern52};
  for (int q = 0; q < 3; ++q) {
    KernelParams k;
    k.kind = kinds[q];
    const double sigma = std::exp(next(out.penalty));
    k.variance = sigma * sigma;
    if (q != 0) {
      k.length_scales.resize(context_dim);
      for (Eigen::Index d = 0; d < context_dim; ++d)
        k.length_scales[d] = std::exp(next(out.penalty));
    }
    Coregionalization b;
    b.a.resize(output_dim);
    for (Eigen::Index d = 0; d < output_dim; ++d) b.a[d] = next(out.penalty);
    b.kappa = std::exp(next(out.penalty));
    out.kernels.push_back(std::move(k));
    out.coreg.push_back(std::move(b));
  }
  return out;
}

Vector encode(const std::vector<KernelParams>& kernels,
              const std::vector<Coregionalization>& coreg,
              const ParamBox& box) {
  std::vector<double> theta;
  for (std::size_t q = 0; q < kernels.size(); ++q) {
    theta.push_back(0.5 * std::log(kernels[q].variance));
    if (kernels[q].kind != KernelKind::Linear)
      for (Eigen::Index d = 0; d < kernels[q].length_scales.size(); ++d)
        theta.push_back(std::log(kernels[q].length_scales[d]));
    for (Eigen::Index d = 0; d < coreg[q].a.size(); ++d)
      theta.push_back(coreg[q].a[d]);
    theta.push_back(std::log(coreg[q].kappa));
  }
  Vector u(box.size());
  for (Eigen::Index i = 0; i < box.size(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    u[i] = std::clamp((theta[s] - box.lo[s]) / (box.hi[s] - box.lo[s]), 0.0, 1.0);
  }
  return u;
}

}  // namespace

MogprModel fit(const ContextDataset& data, const FitConfig& config, Rng& rng) {
  if (data.size() < 1)
    throw std::invalid_argument("fit: dataset must not be empty");
  const Eigen::Index context_dim = data.context_dim();
  const Eigen::Index output_dim = data.solution_dim();

  if (data.size() == 1 || config.generations <= 0 || config.restarts <= 0)
    return make_model(data, default_kernels(context_dim),
                      default_coreg(output_dim));

  const ParamBox box = make_box(context_dim, output_dim);
  const Vector center = column_means(data.solutions);
  const Vector residual = centered_stack(data, center);

  auto negative_lml = [&](const Vector& u) -> double {
    const DecodedParams p = decode(u, box, context_dim, output_dim);
    double value = kFailedFitValue;
    try {
      const Matrix gram = build_gram(data, p.kernels, p.coreg);
      const CholeskyResult factor = cholesky(gram, default_jitter(gram));
      const Vector half =
          factor.L.triangularView<Eigen::Lower>().solve(residual);
      const double lml =
          -0.5 * half.squaredNorm() - 0.5 * log_det_from_cholesky(factor.L) -
          0.5 * static_cast<double>(residual.size()) *
              std::log(2.0 * std::numbers::pi);
      if (std::isfinite(lml)) value = -lml;
    } catch (const NotPositiveDefinite&) {
    }
    return value + 1e3 * p.penalty;
  };

  const CmaHyperParams hp = default_hyperparams(static_cast<int>(box.size()));
  const long budget = static_cast<long>(config.generations) * hp.lambda;
  const RestartPolicy restart{true, 0.0, 1.0};

  double best_value = std::numeric_limits<double>::infinity();
  Vector best_u;
  for (int r = 0; r < config.restarts; ++r) {
    const Vector u0 =
        (r == 0)
            ? encode(default_kernels(context_dim), default_coreg(output_dim),
                     box)
            : rng.uniform_vector(box.size(), 0.0, 1.0);
    const auto init = DistributionState::initial(
        u0, config.cma_sigma0, Matrix::Identity(box.size(), box.size()));
    const RunResult run =
        optimize(negative_lml, init, hp, budget,
                 -std::numeric_limits<double>::infinity(), restart, rng);
    if (run.best_f < best_value) {
      best_value = run.best_f;
      best_u = run.best_x;
    }
  }
  if (!std::isfinite(best_value) || best_value >= kFailedFitValue)
    throw FitDiverged("fit: all restarts produced non-finite likelihood");

  const DecodedParams p = decode(best_u, box, context_dim, output_dim);
  return make_model(data, p.kernels, p.coreg);
}

}  // namespace ctxopt
