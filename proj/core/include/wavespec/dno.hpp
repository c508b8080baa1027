#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "wavespec/grid.hpp"

namespace wavespec::dno {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using grid::Grid1D;
using grid::GridFn;
using grid::StripGrid;

/// Pullback metric of the flattening (x, z) -> (x, (z - eta)/(1 + eta)) that
/// turns the Laplace problem in the fluid domain into a variable-coefficient
/// Laplace-Beltrami problem on the flat strip [-1, 0].
///
/// g^{-1} = [ 1, -eta_x (z+1)/(1+eta) ;
///            -eta_x (z+1)/(1+eta), (1 + (z+1)^2 eta_x^2)/(1+eta)^2 ]
/// and sqrt(det g) = 1 + eta, independent of z.
struct FlatteningMetric {
  StripGrid strip;
  VectorXd eta;
  VectorXd eta_x;
  double min_depth = 0.0;  // min over x of 1 + eta

  Eigen::Matrix2d inverse_metric_at(int ix, double z) const;
  double volume_factor_at(int ix) const { return 1.0 + eta(ix); }
};

/// Build the metric; throws NumericalError when 1 + min(eta) <= kappa.
FlatteningMetric build_flattening(const GridFn& eta, const StripGrid& strip,
                                  double kappa = 0.01);

/// tanh(r) r with r = sqrt(xi^2 + k^2): the flat-surface symbol of G_{0,k}.
double flat_dno_symbol(double xi, double k);

struct DnoOptions {
  int max_iter = 64;
  double tol = 1e-13;       // relative fixed-point update tolerance
  double sym_tol = 1e-6;    // raw asymmetry above this aborts the build
  double kappa = 0.01;      // minimum admissible depth
  int batch = 64;           // boundary columns solved per elliptic pass
};

struct DnoDiagnostics {
  int iterations = 0;
  double final_update = 0.0;
  double asymmetry = 0.0;  // ||G - G^T||_F / ||G||_F before symmetrization
};

/// Discrete realization of u -> G_{eps,k} u for a fixed surface and k.
/// `matrix` is the symmetrized action on nodal values; for k = 0 constants are
/// projected out of domain and range so G_{eps,0} 1 = 0 holds exactly.
struct DnoRealization {
  Grid1D grid;
  VectorXd eta;
  double k = 0.0;
  MatrixXd matrix;
  double asymmetry = 0.0;
  int iterations = 0;
};

/// Transverse-reduced Dirichlet-Neumann solver on a fixed strip.
///
/// Solves (-Delta_g + k^2) psi = 0, psi(x,0) = u, dz psi(x,-1) = 0 by the
/// split psi = u^H + u^r: u^H is the flat harmonic extension applied
/// mode-wise (cosh profile), u^r the variable-coefficient correction solved
/// by a fixed-point iteration preconditioned with the flat operator.
/// Reusable across surfaces and wavenumbers; keeps FFT plans and, when the
/// surface repeats, warm-starts the correction from the previous solve.
class DnoSolver {
 public:
  explicit DnoSolver(const StripGrid& strip, DnoOptions opt = {});
  ~DnoSolver();
  DnoSolver(DnoSolver&&) noexcept;
  DnoSolver& operator=(DnoSolver&&) noexcept;

  /// Apply G_{eps,k} to each column of u. Columns are independent Dirichlet
  /// data; returns the fluxes column by column.
  MatrixXd apply(const VectorXd& eta, double k, const MatrixXd& u,
                 DnoDiagnostics* diag = nullptr);

  /// Full nodal matrix (symmetrized; constants projected out at k = 0).
  DnoRealization matrix(const VectorXd& eta, double k);

  const StripGrid& strip() const;
  const DnoOptions& options() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// One-shot wrappers (a solver is built per call).
GridFn apply_dno(const GridFn& eta, double k, const GridFn& u, const StripGrid& strip);
DnoRealization dno_matrix(const GridFn& eta, double k, const StripGrid& strip,
                          const DnoOptions& opt = {});

/// Shape derivative of the surface: D_eta G_k[eta] phi . h
///   = -G_k[eta](h Z_k) - d/dx( h (phi_x - Z_k eta_x) ) + k^2 h phi,
/// with Z_k = (G_k[eta] phi + eta_x phi_x) / (1 + eta_x^2).
GridFn frechet_dno(const GridFn& eta, const GridFn& phi, const GridFn& h, double k,
                   const StripGrid& strip);

/// Surface fields Z = (G[eta] phi + eta_x phi_x)/(1 + eta_x^2) and
/// v = phi_x - Z eta_x (transverse wavenumber zero).
std::pair<GridFn, GridFn> compute_Z_v(const GridFn& eta, const GridFn& phi,
                                      const StripGrid& strip);

/// Independent cross-check: assemble the full tensor-grid variable-coefficient
/// operator and solve it densely, column by column. Small grids only.
MatrixXd dno_matrix_direct(const GridFn& eta, double k, const StripGrid& strip);

}  // namespace wavespec::dno
