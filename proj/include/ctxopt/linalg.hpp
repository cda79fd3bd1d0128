#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ctxopt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NotPositiveDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotPositiveSemiDefinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularObservedBlock : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mean vector and covariance matrix of a multivariate Gaussian.
struct GaussianParams {
  Vector mean;
  Matrix cov;
};

inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

bool is_symmetric(const Matrix& a, double tol = 1e-12);

/// Starting diagonal jitter for near-singular factorizations:
/// 1e-10 * trace / dim.
double default_jitter(const Matrix& a);

struct CholeskyResult {
  Matrix L;             // lower-triangular factor of a + jitter * I
  double jitter = 0.0;  // amount actually added to the diagonal
};

/// Lower Cholesky factor of a + jitter*I. On failure the jitter is
/// escalated x10 up to six times (starting from default_jitter(a) when the
/// requested jitter is zero) before NotPositiveDefinite is thrown.
CholeskyResult cholesky(const Matrix& a, double jitter = 0.0);

/// Symmetric PSD square root, R * R = c. Eigenvalues below
/// -1e-8 * trace(c) raise NotPositiveSemiDefinite; small negatives are
/// clamped to zero.
Matrix sym_sqrt(const Matrix& c);

/// Kronecker product; block (i, j) of the result is a(i, j) * b.
template <typename DerivedA, typename DerivedB>
Matrix kronecker(const Eigen::MatrixBase<DerivedA>& a,
                 const Eigen::MatrixBase<DerivedB>& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b.derived();
  return out;
}

/// Condition a joint Gaussian on exact observations of a strict subset of
/// its coordinates. Unobserved coordinates keep their original order.
GaussianParams gaussian_condition(const GaussianParams& joint,
                                  const std::vector<Eigen::Index>& observed_idx,
                                  const Vector& observed_vals);

/// Largest eigenvalue of a symmetric matrix.
double max_eigenvalue(const Matrix& a);

// Solve (L L^T) x = b given the lower factor L.
Vector cholesky_solve(const Matrix& L, const Vector& b);
Matrix cholesky_solve(const Matrix& L, const Matrix& b);

/// log det(L L^T) from the factor diagonal.
double log_det_from_cholesky(const Matrix& L);

}  // namespace ctxopt
