#include "wavespec/linalg.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

namespace wavespec::linalg {

namespace {

[[noreturn]] void fail(const char* routine, int info) {
  throw EigenSolveError(std::string(routine) + " failed, info=" + std::to_string(info));
}

}  // namespace

SymEig eig_sym(const MatrixXd& a, bool want_vectors) {
  const int n = static_cast<int>(a.rows());
  SymEig out;
  out.values.resize(n);
  if (want_vectors) {
    out.vectors = a;  // dsyevd overwrites with eigenvectors
    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n,
                              out.values.data());
    if (info != 0) fail("dsyevd", info);
  } else {
    MatrixXd work = a;
    int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n,
                              out.values.data());
    if (info != 0) fail("dsyevd", info);
  }
  return out;
}

double eig_sym_largest(const MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  MatrixXd work = a;
  VectorXd w(n);
  int m = 0;
  std::vector<int> isuppz(2);
  int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'I', 'L', n, work.data(), n, 0.0, 0.0,
                            n, n, 0.0, &m, w.data(), nullptr, 1, isuppz.data());
  if (info != 0) fail("dsyevr", info);
  return w(0);
}

int eig_sym_count_below(const MatrixXd& a, double threshold) {
  const int n = static_cast<int>(a.rows());
  MatrixXd work = a;
  VectorXd w(n);
  int m = 0;
  std::vector<int> isuppz(2 * std::max(1, n));
  // Values in (-inf, threshold); dsyevr half-open interval (vl, vu].
  int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'N', 'V', 'L', n, work.data(), n, -1e300,
                            threshold, 0, 0, 0.0, &m, w.data(), nullptr, 1, isuppz.data());
  if (info != 0) fail("dsyevr", info);
  return m;
}

GenEig eig_general(const MatrixXd& a, bool want_vectors) {
  const int n = static_cast<int>(a.rows());
  MatrixXd work = a;
  VectorXd wr(n), wi(n);
  MatrixXd vr;
  GenEig out;
  int info;
  if (want_vectors) {
    vr.resize(n, n);
    info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'V', n, work.data(), n, wr.data(),
                         wi.data(), nullptr, 1, vr.data(), n);
  } else {
    info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(),
                         wi.data(), nullptr, 1, vr.data(), std::max(1, n));
  }
  if (info != 0) fail("dgeev", info);

  out.values.resize(n);
  for (int i = 0; i < n; ++i) out.values(i) = std::complex<double>(wr(i), wi(i));

  if (want_vectors) {
    out.vectors.resize(n, n);
    for (int j = 0; j < n; ++j) {
      if (wi(j) > 0.0 && j + 1 < n) {
        out.vectors.col(j) = vr.col(j) + std::complex<double>(0, 1) * vr.col(j + 1);
        out.vectors.col(j + 1) = vr.col(j) - std::complex<double>(0, 1) * vr.col(j + 1);
        ++j;
      } else if (wi(j) == 0.0) {
        out.vectors.col(j) = vr.col(j).cast<std::complex<double>>();
      }
    }
  }
  return out;
}

MatrixXd solve(const MatrixXd& a, const MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  const int nrhs = static_cast<int>(b.cols());
  MatrixXd lu = a;
  MatrixXd x = b;
  std::vector<int> ipiv(n);
  int info = LAPACKE_dgesv(LAPACK_COL_MAJOR, n, nrhs, lu.data(), n, ipiv.data(), x.data(),
                           n);
  if (info != 0) fail("dgesv", info);
  return x;
}

LuFactor::LuFactor(const MatrixXd& a) : lu_(a), ipiv_(a.rows()) {
  const int n = static_cast<int>(a.rows());
  anorm_ = a.cwiseAbs().colwise().sum().maxCoeff();
  int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, lu_.data(), n, ipiv_.data());
  // info > 0 (exact singularity) is tolerated: inverse iteration shifts can
  // land on an eigenvalue; solves then produce inf/nan and the caller retries.
  if (info < 0) fail("dgetrf", info);
}

VectorXd LuFactor::solve(const VectorXd& b) const {
  VectorXd x = b;
  const int n = static_cast<int>(lu_.rows());
  int info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n, 1, lu_.data(), n, ipiv_.data(),
                            x.data(), n);
  if (info != 0) fail("dgetrs", info);
  return x;
}

MatrixXd LuFactor::solve(const MatrixXd& b) const {
  MatrixXd x = b;
  const int n = static_cast<int>(lu_.rows());
  int info = LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n, static_cast<int>(b.cols()),
                            lu_.data(), n, ipiv_.data(), x.data(), n);
  if (info != 0) fail("dgetrs", info);
  return x;
}

double LuFactor::rcond() const {
  const int n = static_cast<int>(lu_.rows());
  double rc = 0.0;
  int info = LAPACKE_dgecon(LAPACK_COL_MAJOR, '1', n, lu_.data(), n, anorm_, &rc);
  if (info != 0) fail("dgecon", info);
  return rc;
}

std::pair<double, VectorXd> inverse_iteration(const MatrixXd& a, double shift,
                                              int max_iter, double tol) {
  const int n = static_cast<int>(a.rows());
  MatrixXd shifted = a;
  shifted.diagonal().array() -= shift;
  LuFactor lu(shifted);

  // Deterministic start.
  VectorXd v = VectorXd::LinSpaced(n, 1.0, 2.0).array().sin().matrix();
  v.normalize();

  double lambda = shift;
  for (int it = 0; it < max_iter; ++it) {
    VectorXd w = lu.solve(v);
    double wn = w.norm();
    if (!std::isfinite(wn) || wn == 0.0) {
      // Shift hit the eigenvalue almost exactly; nudge and refactor.
      shifted.diagonal().array() -= 1e-10 * (1.0 + std::abs(shift));
      lu = LuFactor(shifted);
      continue;
    }
    w /= wn;
    double lambda_new = w.dot(a * w);
    VectorXd resid = a * w - lambda_new * w;
    v = w;
    bool converged = resid.norm() <= tol * (1.0 + std::abs(lambda_new));
    lambda = lambda_new;
    if (converged) break;
  }
  return {lambda, v};
}

}  // namespace wavespec::linalg
