#pragma once

#include <vector>

#include "wavespec/dno.hpp"
#include "wavespec/grid.hpp"

namespace wavespec::solitary {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using grid::Grid1D;
using grid::StripGrid;

/// Line solitary wave of the free-surface system in the co-moving frame.
///
/// The surface potential has different limits at +-infinity (tanh-shaped), so
/// on the periodic grid it is stored as phi(x) = ramp * x + phi_tilde(x) with
/// phi_tilde periodic. The ramp slope is an unknown of the steady problem; the
/// flux identity G[eta](ramp * x) = -ramp * eta_x is exact and keeps every
/// evaluation on periodic data.
struct SolitaryWave {
  Params params;
  Grid1D grid;
  StripGrid strip;
  VectorXd eta;
  VectorXd phi_tilde;
  double ramp = 0.0;

  // Derived surface fields of the converged state.
  VectorXd z_field;   // Z = (G phi + eta_x phi_x)/(1 + eta_x^2)
  VectorXd v_field;   // v = phi_x - Z eta_x
  VectorXd gamma;     // 1 - v
  double residual_norm = 0.0;
  int newton_iterations = 0;
  std::vector<double> residual_history;

  VectorXd phi_values() const;  // ramp * x + phi_tilde, for export
  VectorXd phi_x() const;       // ramp + d/dx phi_tilde
};

/// Length so that the leading-order surface satisfies |eta(+-Lx)| < 1e-12.
double default_half_length(const Params& p);

/// Leading-order profiles:
///   eta = -eps^2 sech^2(eps x / (2 sqrt(beta - 1/3))),
///   phi = -2 sqrt(beta - 1/3) eps tanh(eps x / (2 sqrt(beta - 1/3))).
SolitaryWave leading_profile(const Params& p, const StripGrid& strip);

/// Residual of the steady system,
///   r1 = eta_x + G[eta] phi
///   r2 = phi_x - phi_x^2/2 + (G phi + eta_x phi_x)^2 / (2 (1+eta_x^2))
///        - alpha eta + beta d/dx(eta_x / sqrt(1+eta_x^2)).
std::pair<VectorXd, VectorXd> steady_residual(const SolitaryWave& w,
                                              dno::DnoSolver& solver);

struct NewtonOptions {
  double tol = 1e-11;    // on the max norm of (r1, r2)
  int max_iter = 25;
  int max_halvings = 8;
};

/// Newton refinement restricted to {eta even, phi odd}; the surface mean is
/// pinned to the leading-order value and the potential ramp is an unknown.
/// The Jacobian is the Hamiltonian linearization evaluated at the iterate.
SolitaryWave newton_refine(const SolitaryWave& guess, const NewtonOptions& opt = {});

struct IdentityReport {
  double flux_identity = 0.0;    // || G[eta] phi + eta_x ||_inf
  double gamma_identity = 0.0;   // || gamma - (1 - phi_x)/(1+eta_x^2) ||_inf
  double z_identity = 0.0;       // || Z + gamma eta_x ||_inf
  double gamma_min = 0.0;        // min gamma (should be positive)
};

/// Identities satisfied by the solitary wave; residuals in the max norm.
IdentityReport verify_identities(const SolitaryWave& w);

}  // namespace wavespec::solitary
