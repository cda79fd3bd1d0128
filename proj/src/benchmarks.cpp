#include "ctxopt/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace ctxopt {

double base_eval(BaseFunction base, const Vector& y) {
  switch (base) {
    case BaseFunction::Sphere:
      return y.squaredNorm();
    case BaseFunction::Rosenbrock: {
      if (y.size() < 2)
        throw DimensionMismatch("rosenbrock: dimension must be >= 2");
      double sum = 0.0;
      for (Eigen::Index i = 0; i + 1 < y.size(); ++i) {
        const double a = y[i + 1] - y[i] * y[i];
        const double b = 1.0 - y[i];
        sum += 100.0 * a * a + b * b;
      }
      return sum;
    }
    case BaseFunction::Easom: {
      if (y.size() != 2)
        throw DimensionMismatch("easom: dimension must be exactly 2");
      const double pi = std::numbers::pi;
      const double d1 = y[0] - pi;
      const double d2 = y[1] - pi;
      return -std::cos(y[0]) * std::cos(y[1]) * std::exp(-(d1 * d1 + d2 * d2)) +
             1.0;
    }
  }
  throw std::logic_error("base_eval: unknown base function");
}

Vector base_optimum(BaseFunction base, Eigen::Index n) {
  switch (base) {
    case BaseFunction::Sphere:
      return Vector::Zero(n);
    case BaseFunction::Rosenbrock:
      return Vector::Ones(n);
    case BaseFunction::Easom:
      return Vector::Constant(2, std::numbers::pi);
  }
  throw std::logic_error("base_optimum: unknown base function");
}

Vector apply_shift(ShiftType shift, const Vector& x, const Vector& alpha,
                   const Matrix& g, const Vector& noise, double eps) {
  if (g.rows() != x.size() || g.cols() != alpha.size())
    throw DimensionMismatch("apply_shift: shift matrix dims disagree");
  switch (shift) {
    case ShiftType::Linear:
      return x - g * alpha;
    case ShiftType::Nonlinear:
      return x - g * alpha.cwiseProduct(alpha);
    case ShiftType::Noisy:
      if (noise.size() != x.size())
        throw DimensionMismatch("apply_shift: noise vector dims disagree");
      return x - g * alpha + eps * eps * noise;
  }
  throw std::logic_error("apply_shift: unknown shift type");
}

int default_dimension(BaseFunction base) {
  return base == BaseFunction::Easom ? 2 : 20;
}

long default_budget(BaseFunction base) {
  return base == BaseFunction::Rosenbrock ? 40000 : 10000;
}

ContextualObjective::ContextualObjective(BaseFunction base, ShiftType shift,
                                         Matrix g, Vector alpha, Vector noise,
                                         double eps)
    : base_(base),
      shift_(shift),
      g_(std::move(g)),
      alpha_(std::move(alpha)),
      noise_(std::move(noise)),
      eps_(eps) {
  if (g_.cols() != alpha_.size())
    throw DimensionMismatch("objective: context dims disagree");
  if (base_ == BaseFunction::Easom && g_.rows() != 2)
    throw DimensionMismatch("objective: easom requires dimension 2");
  if (shift_ == ShiftType::Noisy) {
    if (noise_.size() != g_.rows())
      throw DimensionMismatch("objective: noisy shift requires a frozen noise vector");
  } else {
    noise_ = Vector::Zero(g_.rows());
  }
}

double ContextualObjective::value(const Vector& x) const {
  return base_eval(base_, apply_shift(shift_, x, alpha_, g_, noise_, eps_));
}

Vector ContextualObjective::optimum_location() const {
  const Vector y_star = base_optimum(base_, g_.rows());
  switch (shift_) {
    case ShiftType::Linear:
      return y_star + g_ * alpha_;
    case ShiftType::Nonlinear:
      return y_star + g_ * alpha_.cwiseProduct(alpha_);
    case ShiftType::Noisy:
      return y_star + g_ * alpha_ - eps_ * eps_ * noise_;
  }
  throw std::logic_error("optimum_location: unknown shift type");
}

Vector sample_context(Rng& rng,
                      const std::vector<std::pair<double, double>>& ranges) {
  Vector v(static_cast<Eigen::Index>(ranges.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto& [lo, hi] = ranges[static_cast<std::size_t>(i)];
    if (hi < lo) throw std::invalid_argument("sample_context: bad range");
    v[i] = rng.uniform(lo, hi);
  }
  return v;
}

Matrix sample_shift_matrix(Rng& rng, Eigen::Index n, Eigen::Index n_alpha) {
  Matrix g(n, n_alpha);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n_alpha; ++j) g(i, j) = rng.normal();
  return g;
}

}  // namespace ctxopt
