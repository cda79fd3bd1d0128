#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "ctxopt/linalg.hpp"
#include "ctxopt/rng.hpp"

namespace ctxopt {

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BaseFunction { Sphere, Rosenbrock, Easom };
enum class ShiftType { Linear, Nonlinear, Noisy };

/// Sphere: sum y_i^2. Rosenbrock: sum 100 (y_{i+1} - y_i^2)^2 + (1 - y_i)^2.
/// Easom (2-d): -cos(y1) cos(y2) exp(-((y1-pi)^2 + (y2-pi)^2)) + 1.
/// All have minimum value 0.
double base_eval(BaseFunction base, const Vector& y);

/// Pre-shift minimizer of the base function.
Vector base_optimum(BaseFunction base, Eigen::Index n);

/// Context-dependent search-space transformation:
///   Linear     y = x - G a
///   Nonlinear  y = x - G (a o a)      (o = element-wise product)
///   Noisy      y = x - G a + eps^2 * noise
Vector apply_shift(ShiftType shift, const Vector& x, const Vector& alpha,
                   const Matrix& g, const Vector& noise, double eps);

int default_dimension(BaseFunction base);
long default_budget(BaseFunction base);

/// A base function composed with a context-dependent shift. The noise
/// vector is drawn once per task presentation and frozen, so evaluation is
/// deterministic. Only operator() touches the evaluation counter.
class ContextualObjective {
 public:
  ContextualObjective(BaseFunction base, ShiftType shift, Matrix g,
                      Vector alpha, Vector noise = Vector(),
                      double eps = 0.25);

  double operator()(const Vector& x) {
    ++evals_;
    return value(x);
  }
  double value(const Vector& x) const;

  /// x* with f(x*) = 0, solved from the shift (test/analysis use).
  Vector optimum_location() const;

  long eval_count() const { return evals_; }
  Eigen::Index dimension() const { return g_.rows(); }
  BaseFunction base() const { return base_; }
  ShiftType shift() const { return shift_; }
  const Matrix& shift_matrix() const { return g_; }
  const Vector& context() const { return alpha_; }
  const Vector& noise() const { return noise_; }
  double eps() const { return eps_; }

 private:
  BaseFunction base_;
  ShiftType shift_;
  Matrix g_;
  Vector alpha_;
  Vector noise_;
  double eps_;
  long evals_ = 0;
};

/// Uniform context vector, one [lo, hi] range per coordinate.
Vector sample_context(Rng& rng,
                      const std::vector<std::pair<double, double>>& ranges);

/// n x n_alpha shift matrix with standard normal entries.
Matrix sample_shift_matrix(Rng& rng, Eigen::Index n, Eigen::Index n_alpha);

}  // namespace ctxopt
