#include "wavespec/solitary.hpp"

#include <cmath>
#include <sstream>

#include "wavespec/linalg.hpp"

namespace wavespec::solitary {

VectorXd SolitaryWave::phi_values() const {
  return ramp * grid.nodes + phi_tilde;
}

VectorXd SolitaryWave::phi_x() const {
  return (grid::spectral_derivative(grid, phi_tilde, 1).array() + ramp).matrix();
}

double default_half_length(const Params& p) {
  return 30.0 * p.kdv_scale() / p.epsilon;
}

namespace {

void fill_derived(SolitaryWave& w, dno::DnoSolver& solver) {
  VectorXd eta_x = grid::spectral_derivative(w.grid, w.eta, 1);
  VectorXd phi_x = w.phi_x();
  VectorXd gphi = -w.ramp * eta_x + solver.apply(w.eta, 0.0, w.phi_tilde);
  w.z_field = (gphi + eta_x.cwiseProduct(phi_x)).array() /
              (1.0 + eta_x.array().square());
  w.v_field = phi_x - w.z_field.cwiseProduct(eta_x);
  w.gamma = (1.0 - w.v_field.array()).matrix();
}

double residual_inf(const std::pair<VectorXd, VectorXd>& r) {
  return std::max(r.first.cwiseAbs().maxCoeff(), r.second.cwiseAbs().maxCoeff());
}

}  // namespace

SolitaryWave leading_profile(const Params& p, const StripGrid& strip) {
  p.validate();
  SolitaryWave w;
  w.params = p;
  w.strip = strip;
  w.grid = strip.base;
  const double c = p.kdv_scale();
  const double eps = p.epsilon;
  const auto& x = w.grid.nodes;

  w.eta = (-eps * eps) * (eps * x.array() / (2.0 * c)).cosh().pow(-2);
  VectorXd phi_full = -2.0 * c * eps * (eps * x.array() / (2.0 * c)).tanh();
  // Transport the tanh jump into a linear ramp so the remainder is periodic.
  const double lx = w.grid.half_length;
  w.ramp = -2.0 * c * eps * std::tanh(eps * lx / (2.0 * c)) / lx;
  w.phi_tilde = phi_full - w.ramp * x;

  dno::DnoSolver solver(strip);
  fill_derived(w, solver);
  w.residual_norm = residual_inf(steady_residual(w, solver));
  return w;
}

std::pair<VectorXd, VectorXd> steady_residual(const SolitaryWave& w,
                                              dno::DnoSolver& solver) {
  const auto& g = w.grid;
  const Params& p = w.params;
  VectorXd eta_x = grid::spectral_derivative(g, w.eta, 1);
  VectorXd phi_x = w.phi_x();
  VectorXd gphi = -w.ramp * eta_x + solver.apply(w.eta, 0.0, w.phi_tilde);

  VectorXd r1 = eta_x + gphi;

  VectorXd zeta_m1 = (1.0 + eta_x.array().square()).rsqrt();
  VectorXd z = (gphi + eta_x.cwiseProduct(phi_x)).array() /
               (1.0 + eta_x.array().square());
  VectorXd tension =
      grid::spectral_derivative(g, VectorXd(eta_x.cwiseProduct(zeta_m1)), 1);
  VectorXd r2 = phi_x.array() - 0.5 * phi_x.array().square() +
                0.5 * (1.0 + eta_x.array().square()) * z.array().square() -
                p.alpha() * w.eta.array() + p.beta * tension.array();
  return {r1, r2};
}

SolitaryWave newton_refine(const SolitaryWave& guess, const NewtonOptions& opt) {
  SolitaryWave w = guess;
  const auto& g = w.grid;
  const int nx = g.n_modes;
  const int nc = nx / 2 + 1;  // cos modes 0..nx/2
  const int ns = nx / 2 - 1;  // sin modes 1..nx/2-1
  const Params& p = w.params;

  auto bases = grid::symmetric_bases(g);
  dno::DnoSolver solver(w.strip);
  MatrixXd dx = grid::derivative_matrix(g, 1);

  // Symmetry-exact parametrization: eta from cosine coefficients (the mean is
  // pinned to the leading-order value), phi_tilde from sine coefficients.
  VectorXd eta_cos = bases.coef_cos * w.eta;
  VectorXd phi_sin = bases.coef_sin * w.phi_tilde;
  const double eta_mean = eta_cos(0);
  double ramp = w.ramp;

  auto rebuild = [&]() {
    w.eta = bases.eval_cos * eta_cos;
    w.phi_tilde = bases.eval_sin * phi_sin;
    w.ramp = ramp;
  };
  rebuild();

  auto residual_vec = [&](double* norm_out) {
    auto r = steady_residual(w, solver);
    VectorXd rv(ns + nc);
    rv.head(ns) = bases.coef_sin * r.first;   // r1 is odd
    rv.tail(nc) = bases.coef_cos * r.second;  // r2 is even
    if (norm_out) *norm_out = residual_inf(r);
    return rv;
  };

  w.residual_history.clear();
  double rnorm = 0.0;
  VectorXd rv = residual_vec(&rnorm);
  w.residual_history.push_back(rnorm);

  int it = 0;
  while (rnorm > opt.tol) {
    if (it >= opt.max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << opt.max_iter
         << " iterations; residual history:";
      for (double r : w.residual_history) os << " " << r;
      throw NumericalError(os.str());
    }
    ++it;

    // Hamiltonian linearization at the iterate.
    VectorXd eta_x = grid::spectral_derivative(g, w.eta, 1);
    VectorXd phi_x = w.phi_x();
    MatrixXd gmat = solver.matrix(w.eta, 0.0).matrix;
    VectorXd gphi = -ramp * eta_x + solver.apply(w.eta, 0.0, w.phi_tilde);
    VectorXd z = (gphi + eta_x.cwiseProduct(phi_x)).array() /
                 (1.0 + eta_x.array().square());
    VectorXd v = phi_x - z.cwiseProduct(eta_x);
    VectorXd v_x = grid::spectral_derivative(g, v, 1);
    VectorXd zeta3 = (1.0 + eta_x.array().square()).pow(-1.5);

    MatrixXd pmat = p.beta * dx * zeta3.asDiagonal() * dx;
    MatrixXd j11 = dx - gmat * z.asDiagonal() - dx * v.asDiagonal();
    const MatrixXd& j12 = gmat;
    MatrixXd j21 = pmat;
    j21.noalias() -= z.asDiagonal() * gmat * z.asDiagonal();
    j21.diagonal().array() -= p.alpha();
    j21.diagonal() -= z.cwiseProduct(v_x);
    MatrixXd j22 = dx - v.asDiagonal() * dx;
    j22.noalias() += z.asDiagonal() * gmat;

    // Ramp column: d r1/da = -eta_x, d r2/da = 1 - phi_x.
    VectorXd da1 = -eta_x;
    VectorXd da2 = (1.0 - phi_x.array()).matrix();

    MatrixXd jred(ns + nc, nx);
    MatrixXd ecos1 = bases.eval_cos.rightCols(nc - 1);  // mean mode pinned
    jred.topLeftCorner(ns, nc - 1) = bases.coef_sin * (j11 * ecos1);
    jred.block(0, nc - 1, ns, ns) = bases.coef_sin * (j12 * bases.eval_sin);
    jred.topRightCorner(ns, 1) = bases.coef_sin * da1;
    jred.bottomLeftCorner(nc, nc - 1) = bases.coef_cos * (j21 * ecos1);
    jred.block(ns, nc - 1, nc, ns) = bases.coef_cos * (j22 * bases.eval_sin);
    jred.bottomRightCorner(nc, 1) = bases.coef_cos * da2;

    VectorXd delta = linalg::solve(jred, VectorXd(-rv));

    // Halving line search on the residual norm.
    VectorXd eta_cos0 = eta_cos, phi_sin0 = phi_sin;
    double ramp0 = ramp;
    double lambda = 1.0;
    double rnew = 0.0;
    VectorXd rv_new;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      eta_cos.tail(nc - 1) = eta_cos0.tail(nc - 1) + lambda * delta.head(nc - 1);
      eta_cos(0) = eta_mean;
      phi_sin = phi_sin0 + lambda * delta.segment(nc - 1, ns);
      ramp = ramp0 + lambda * delta(nx - 1);
      rebuild();
      rv_new = residual_vec(&rnew);
      if (rnew <= rnorm * (1.0 - 1e-4 * lambda) || rnew <= opt.tol) break;
      lambda *= 0.5;
    }
    rv = rv_new;
    rnorm = rnew;
    w.residual_history.push_back(rnorm);
  }

  w.residual_norm = rnorm;
  w.newton_iterations = it;
  fill_derived(w, solver);
  return w;
}

IdentityReport verify_identities(const SolitaryWave& w) {
  dno::DnoSolver solver(w.strip);
  VectorXd eta_x = grid::spectral_derivative(w.grid, w.eta, 1);
  VectorXd phi_x = w.phi_x();
  VectorXd gphi = -w.ramp * eta_x + solver.apply(w.eta, 0.0, w.phi_tilde);

  IdentityReport rep;
  rep.flux_identity = (gphi + eta_x).cwiseAbs().maxCoeff();
  VectorXd gamma_ref = ((1.0 - phi_x.array()) / (1.0 + eta_x.array().square())).matrix();
  rep.gamma_identity = (w.gamma - gamma_ref).cwiseAbs().maxCoeff();
  rep.z_identity = (w.z_field + w.gamma.cwiseProduct(eta_x)).cwiseAbs().maxCoeff();
  rep.gamma_min = w.gamma.minCoeff();
  return rep;
}

}  // namespace wavespec::solitary
