#include "ctxopt/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ctxopt {

bool is_symmetric(const Matrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.cols(); ++j)
      if (std::abs(a(i, j) - a(j, i)) > tol * std::max(1.0, std::abs(a(i, j))))
        return false;
  return true;
}

double default_jitter(const Matrix& a) {
  return 1e-10 * a.trace() / static_cast<double>(a.rows());
}

CholeskyResult cholesky(const Matrix& a, double jitter) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("cholesky: matrix must be square, dim >= 1");
  if (jitter < 0.0) throw std::invalid_argument("cholesky: jitter must be >= 0");

  const double base = std::max(default_jitter(a), 0.0);
  double j = jitter;
  for (int attempt = 0; attempt <= 6; ++attempt) {
    Matrix work = a;
    if (j > 0.0) work.diagonal().array() += j;
    Eigen::LLT<Matrix> llt(work);
    if (llt.info() == Eigen::Success) return {Matrix(llt.matrixL()), j};
    j = (j > 0.0) ? 10.0 * j : base;
    if (j == 0.0) break;  // nothing to escalate
  }
  throw NotPositiveDefinite(
      "cholesky: matrix not positive definite after jitter escalation");
}

Matrix sym_sqrt(const Matrix& c) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(c);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("sym_sqrt: eigendecomposition failed");
  const Vector& evals = es.eigenvalues();
  if (evals.minCoeff() < -1e-8 * c.trace())
    throw NotPositiveSemiDefinite("sym_sqrt: matrix has negative eigenvalues");
  const Vector roots = evals.cwiseMax(0.0).cwiseSqrt();
  return symmetrized(es.eigenvectors() * roots.asDiagonal() *
                     es.eigenvectors().transpose());
}

GaussianParams gaussian_condition(const GaussianParams& joint,
                                  const std::vector<Eigen::Index>& observed_idx,
                                  const Vector& observed_vals) {
  const Eigen::Index dim = joint.mean.size();
  if (joint.cov.rows() != dim || joint.cov.cols() != dim)
    throw std::invalid_argument("gaussian_condition: mean/cov dims disagree");
  if (static_cast<Eigen::Index>(observed_idx.size()) != observed_vals.size())
    throw std::invalid_argument("gaussian_condition: index/value count mismatch");

  std::vector<char> observed(dim, 0);
  for (Eigen::Index idx : observed_idx) {
    if (idx < 0 || idx >= dim)
      throw std::invalid_argument("gaussian_condition: index out of range");
    if (observed[idx])
      throw std::invalid_argument("gaussian_condition: duplicate index");
    observed[idx] = 1;
  }
  const Eigen::Index na = static_cast<Eigen::Index>(observed_idx.size());
  const Eigen::Index nb = dim - na;
  if (na == 0 || nb == 0)
    throw std::invalid_argument(
        "gaussian_condition: observed set must be a nonempty strict subset");

  std::vector<Eigen::Index> free_idx;
  free_idx.reserve(nb);
  for (Eigen::Index i = 0; i < dim; ++i)
    if (!observed[i]) free_idx.push_back(i);

  Vector mu_a(na), mu_b(nb);
  Matrix s_aa(na, na), s_ba(nb, na), s_bb(nb, nb);
  for (Eigen::Index i = 0; i < na; ++i) {
    mu_a[i] = joint.mean[observed_idx[i]];
    for (Eigen::Index j = 0; j < na; ++j)
      s_aa(i, j) = joint.cov(observed_idx[i], observed_idx[j]);
  }
  for (Eigen::Index i = 0; i < nb; ++i) {
    mu_b[i] = joint.mean[free_idx[i]];
    for (Eigen::Index j = 0; j < na; ++j)
      s_ba(i, j) = joint.cov(free_idx[i], observed_idx[j]);
    for (Eigen::Index j = 0; j < nb; ++j)
      s_bb(i, j) = joint.cov(free_idx[i], free_idx[j]);
  }

  Eigen::LLT<Matrix> llt(symmetrized(s_aa));
  if (llt.info() != Eigen::Success)
    throw SingularObservedBlock(
        "gaussian_condition: observed covariance block is not positive definite");

  const Vector mean = mu_b + s_ba * llt.solve(observed_vals - mu_a);
  const Matrix cov = symmetrized(s_bb - s_ba * llt.solve(s_ba.transpose()));
  return {mean, cov};
}

double max_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("max_eigenvalue: eigendecomposition failed");
  return es.eigenvalues().maxCoeff();
}

Vector cholesky_solve(const Matrix& L, const Vector& b) {
  Vector y = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

Matrix cholesky_solve(const Matrix& L, const Matrix& b) {
  Matrix y = L.triangularView<Eigen::Lower>().solve(b);
  return L.transpose().triangularView<Eigen::Upper>().solve(y);
}

double log_det_from_cholesky(const Matrix& L) {
  return 2.0 * L.diagonal().array().log().sum();
}

}  // namespace ctxopt
