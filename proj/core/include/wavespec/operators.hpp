#pragma once

#include "wavespec/linalg.hpp"
#include "wavespec/solitary.hpp"

namespace wavespec::operators {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using solitary::SolitaryWave;

enum class BlockKind { L, Lambda, JL, JLambda };

/// 2x2 block operator on (U1, U2) pairs of grid functions.
/// For the symmetric kinds a21 == a12^T holds exactly by construction.
struct BlockOperator {
  BlockKind kind = BlockKind::L;
  double k = 0.0;
  MatrixXd a11, a12, a21, a22;

  bool symmetric_kind() const {
    return kind == BlockKind::L || kind == BlockKind::Lambda;
  }
  Eigen::Index block_size() const { return a11.rows(); }
  MatrixXd full() const;
  double asymmetry() const;  // ||A - A^T||_F / ||A||_F of the full matrix
};

/// Curvature operator P_{eps,k} u = beta (d/dx((1+eta_x^2)^{-3/2} u_x) - k^2 (1+eta_x^2)^{-1/2} u),
/// assembled in divergence form (exactly symmetric).
MatrixXd assemble_P(const SolitaryWave& w, double k);

/// L(k) = [ -P_{eps,k} + alpha + (v-1) Z_x ,  (v-1) d/dx ;
///          -d/dx((v-1) .)                 ,  G_{eps,k}  ].
BlockOperator assemble_L(const SolitaryWave& w, double k, const MatrixXd& g_matrix);

struct ConjugatedPair {
  BlockOperator lambda;  // Lambda(k)
  MatrixXd p_mat;        // [[I,0],[Z,I]]  with L(k) = P^T Lambda(k) P
  MatrixXd q_mat;        // P^{-1}
};

/// Lambda(k) of the unreduced linearization together with the conjugators.
ConjugatedPair assemble_Lambda(const SolitaryWave& w, double k,
                               const MatrixXd& g_matrix);

/// J applied on the left: [[a21, a22], [-a11, -a12]].
BlockOperator assemble_JL(const BlockOperator& op);

/// The symmetric matrix J op J whose largest eigenvalue is the f(k) curve.
MatrixXd assemble_JLJ(const BlockOperator& op);

/// M u = -dx^{-1} G_{eps,0} dx^{-1} u on the subspace with no mean and no
/// Nyquist content (dx^{-1} annihilates both). Inverses are taken on that
/// subspace through a rank-2 regularization.
class MOperator {
 public:
  MOperator(const grid::Grid1D& g, const MatrixXd& g0_matrix);

  const MatrixXd& matrix() const { return m_; }
  VectorXd apply(const VectorXd& u) const { return m_ * u; }

  /// Solve M g = f. `mean_residual` receives the removed mean/Nyquist content
  /// relative to ||f||; the caller decides whether that is an error.
  VectorXd solve(const VectorXd& f, double* mean_residual = nullptr) const;
  VectorXd project(const VectorXd& u) const;

 private:
  MatrixXd m_;
  VectorXd ones_, nyq_;  // unit kernel directions
  std::unique_ptr<linalg::LuFactor> lu_;
};

/// Reduced operator A_eps = -P_{eps,0} + alpha + gamma (gamma eta_x)_x - gamma M^{-1}(gamma .)
/// acting on surface perturbations; symmetric, negative/zero eigenvalues carry
/// the one-dimensional stability information.
MatrixXd assemble_A_eps(const SolitaryWave& w, const MatrixXd& g0_matrix);

/// Convenience wrapper around MOperator::solve for a single right-hand side.
VectorXd apply_M_inverse(const SolitaryWave& w, const MatrixXd& g0_matrix,
                         const VectorXd& f, double* mean_residual = nullptr);

}  // namespace wavespec::operators
