#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace wavespec::linalg {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Thrown when a LAPACK driver reports failure (info != 0).
class EigenSolveError : public std::runtime_error {
 public:
  explicit EigenSolveError(const std::string& what) : std::runtime_error(what) {}
};

struct SymEig {
  VectorXd values;   // ascending
  MatrixXd vectors;  // empty unless requested
};

struct GenEig {
  VectorXcd values;
  MatrixXcd vectors;  // empty unless requested
};

/// Full symmetric eigendecomposition (dsyevd / dsyevr).
SymEig eig_sym(const MatrixXd& a, bool want_vectors);

/// Largest eigenvalue of a symmetric matrix (dsyevr, one eigenvalue).
double eig_sym_largest(const MatrixXd& a);

/// Count of eigenvalues of a symmetric matrix below `threshold`.
int eig_sym_count_below(const MatrixXd& a, double threshold);

/// General real eigenproblem (dgeev). Eigenvectors are complex-paired.
GenEig eig_general(const MatrixXd& a, bool want_vectors);

/// Dense solve A X = B (dgesv).
MatrixXd solve(const MatrixXd& a, const MatrixXd& b);

/// Reusable LU factorization (dgetrf / dgetrs).
class LuFactor {
 public:
  explicit LuFactor(const MatrixXd& a);
  VectorXd solve(const VectorXd& b) const;
  MatrixXd solve(const MatrixXd& b) const;
  double rcond() const;  // 1-norm reciprocal condition estimate

 private:
  MatrixXd lu_;
  std::vector<int> ipiv_;
  double anorm_ = 0.0;
};

/// Inverse iteration for the eigenvalue of `a` nearest `shift`.
/// Returns (refined eigenvalue, unit eigenvector). Real arithmetic: intended
/// for real simple eigenvalues well separated from the rest of the spectrum.
std::pair<double, VectorXd> inverse_iteration(const MatrixXd& a, double shift,
                                              int max_iter = 8, double tol = 1e-12);

}  // namespace wavespec::linalg
