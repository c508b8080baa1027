#include "wavespec/operators.hpp"

#include <cmath>

namespace wavespec::operators {

MatrixXd BlockOperator::full() const {
  const auto n = block_size();
  MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = a11;
  m.topRightCorner(n, n) = a12;
  m.bottomLeftCorner(n, n) = a21;
  m.bottomRightCorner(n, n) = a22;
  return m;
}

double BlockOperator::asymmetry() const {
  MatrixXd m = full();
  double n = m.norm();
  return n > 0 ? (m - m.transpose()).norm() / n : 0.0;
}

MatrixXd assemble_P(const SolitaryWave& w, double k) {
  const auto& g = w.grid;
  VectorXd eta_x = grid::spectral_derivative(g, w.eta, 1);
  VectorXd zeta3 = (1.0 + eta_x.array().square()).pow(-1.5);
  VectorXd zeta1 = (1.0 + eta_x.array().square()).rsqrt();
  MatrixXd dx = grid::derivative_matrix(g, 1);
  MatrixXd p = w.params.beta * dx * zeta3.asDiagonal() * dx;
  p.noalias() -= (w.params.beta * k * k) * MatrixXd(zeta1.asDiagonal());
  return p;
}

BlockOperator assemble_L(const SolitaryWave& w, double k, const MatrixXd& g_matrix) {
  const auto& g = w.grid;
  BlockOperator op;
  op.kind = BlockKind::L;
  op.k = k;

  VectorXd z_x = grid::spectral_derivative(g, w.z_field, 1);
  VectorXd vm1 = (w.v_field.array() - 1.0).matrix();
  MatrixXd dx = grid::derivative_matrix(g, 1);

  op.a11 = -assemble_P(w, k);
  op.a11.diagonal().array() += w.params.alpha();
  op.a11.diagonal() += vm1.cwiseProduct(z_x);
  op.a21 = -dx * vm1.asDiagonal();
  op.a12 = op.a21.transpose();
  op.a22 = g_matrix;
  return op;
}

ConjugatedPair assemble_Lambda(const SolitaryWave& w, double k,
                               const MatrixXd& g_matrix) {
  const auto& g = w.grid;
  const int n = g.n_modes;
  ConjugatedPair out;
  BlockOperator& op = out.lambda;
  op.kind = BlockKind::Lambda;
  op.k = k;

  VectorXd v_x = grid::spectral_derivative(g, w.v_field, 1);
  VectorXd vm1 = (w.v_field.array() - 1.0).matrix();
  const VectorXd& z = w.z_field;
  MatrixXd dx = grid::derivative_matrix(g, 1);

  op.a11 = -assemble_P(w, k);
  op.a11.noalias() += z.asDiagonal() * g_matrix * z.asDiagonal();
  op.a11.diagonal().array() += w.params.alpha();
  op.a11.diagonal() += z.cwiseProduct(v_x);
  op.a12 = vm1.asDiagonal() * dx;
  op.a12.noalias() -= z.asDiagonal() * g_matrix;
  op.a21 = op.a12.transpose();
  op.a22 = g_matrix;

  out.p_mat = MatrixXd::Identity(2 * n, 2 * n);
  out.p_mat.bottomLeftCorner(n, n) = MatrixXd(z.asDiagonal());
  out.q_mat = MatrixXd::Identity(2 * n, 2 * n);
  out.q_mat.bottomLeftCorner(n, n) = MatrixXd((-z).asDiagonal());
  return out;
}

BlockOperator assemble_JL(const BlockOperator& op) {
  BlockOperator jl;
  jl.kind = op.kind == BlockKind::L ? BlockKind::JL : BlockKind::JLambda;
  jl.k = op.k;
  jl.a11 = op.a21;
  jl.a12 = op.a22;
  jl.a21 = -op.a11;
  jl.a22 = -op.a12;
  return jl;
}

MatrixXd assemble_JLJ(const BlockOperator& op) {
  const auto n = op.block_size();
  MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = -op.a22;
  m.topRightCorner(n, n) = op.a21;
  m.bottomLeftCorner(n, n) = op.a12;
  m.bottomRightCorner(n, n) = -op.a11;
  return m;
}

namespace {

// dx^{-1}: Fourier multiplier 1/(i xi), zero on the mean and Nyquist modes.
MatrixXd antiderivative_matrix(const grid::Grid1D& g) {
  const int n = g.n_modes;
  MatrixXd k(n, n);
  VectorXd e = VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e(j) = 1.0;
    grid::VectorXcd c = grid::fft(g, e);
    for (int m = 0; m < n; ++m) {
      double xi = g.wavenumbers(m);
      if (m == 0 || m == g.nyquist_index())
        c(m) = 0.0;
      else
        c(m) /= grid::complexd(0.0, xi);
    }
    k.col(j) = grid::ifft(g, c).real();
    e(j) = 0.0;
  }
  return 0.5 * (k - k.transpose()).eval();  // exactly skew, like d/dx
}

}  // namespace

MOperator::MOperator(const grid::Grid1D& g, const MatrixXd& g0_matrix) {
  const int n = g.n_modes;
  MatrixXd kinv = antiderivative_matrix(g);
  m_ = -kinv * g0_matrix * kinv;
  m_ = 0.5 * (m_ + m_.transpose()).eval();

  ones_ = VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  nyq_.resize(n);
  for (int j = 0; j < n; ++j)
    nyq_(j) = ((j % 2 == 0) ? 1.0 : -1.0) / std::sqrt(double(n));

  MatrixXd reg = m_;
  reg.noalias() += ones_ * ones_.transpose();
  reg.noalias() += nyq_ * nyq_.transpose();
  lu_ = std::make_unique<linalg::LuFactor>(reg);
}

VectorXd MOperator::project(const VectorXd& u) const {
  VectorXd out = u;
  out -= ones_ * ones_.dot(u);
  out -= nyq_ * nyq_.dot(u);
  return out;
}

VectorXd MOperator::solve(const VectorXd& f, double* mean_residual) const {
  VectorXd fp = project(f);
  if (mean_residual) {
    double fn = f.norm();
    *mean_residual = fn > 0 ? (f - fp).norm() / fn : 0.0;
  }
  return project(lu_->solve(fp));
}

MatrixXd assemble_A_eps(const SolitaryWave& w, const MatrixXd& g0_matrix) {
  const auto& g = w.grid;
  VectorXd eta_x = grid::spectral_derivative(g, w.eta, 1);
  VectorXd inner =
      grid::spectral_derivative(g, VectorXd(w.gamma.cwiseProduct(eta_x)), 1);

  MatrixXd a = -assemble_P(w, 0.0);
  a.diagonal().array() += w.params.alpha();
  a.diagonal() += w.gamma.cwiseProduct(inner);

  MOperator m(g, g0_matrix);
  MatrixXd b = w.gamma.asDiagonal();
  for (int j = 0; j < b.cols(); ++j) b.col(j) = m.project(b.col(j));
  // b = Pi diag(gamma); the nonlocal term is b^T M^{-1} b.
  MatrixXd y(b.rows(), b.cols());
  for (int j = 0; j < b.cols(); ++j) y.col(j) = m.solve(b.col(j));
  MatrixXd nonlocal = b.transpose() * y;
  a -= 0.5 * (nonlocal + nonlocal.transpose());
  return 0.5 * (a + a.transpose()).eval();
}

VectorXd apply_M_inverse(const SolitaryWave& w, const MatrixXd& g0_matrix,
                         const VectorXd& f, double* mean_residual) {
  MOperator m(w.grid, g0_matrix);
  return m.solve(f, mean_residual);
}

}  // namespace wavespec::operators
