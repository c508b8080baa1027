#pragma once

#include <Eigen/Dense>
#include <complex>

#include "wavespec/common.hpp"

namespace wavespec::grid {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using complexd = std::complex<double>;

/// Periodic Fourier collocation grid on [-Lx, Lx).
///
/// Nodes x_j = -Lx + 2 Lx j / Nx. Wavenumbers xi_n = pi n / Lx for
/// n in {-Nx/2, ..., Nx/2 - 1}, stored in FFT order (0, 1, ..., -1).
struct Grid1D {
  double half_length = 0.0;  // Lx
  int n_modes = 0;           // Nx, even
  VectorXd nodes;
  VectorXd wavenumbers;  // FFT order

  double spacing() const { return 2.0 * half_length / n_modes; }
  int nyquist_index() const { return n_modes / 2; }

  bool operator==(const Grid1D& o) const {
    return half_length == o.half_length && n_modes == o.n_modes;
  }
};

/// Vertical extension of a Grid1D over the flat strip [-1, 0].
/// Chebyshev-Gauss-Lobatto nodes, z[0] = -1 and z[Nz-1] = 0 exactly.
struct StripGrid {
  Grid1D base;
  int n_vertical = 0;
  VectorXd z;
  MatrixXd dz;  // spectral differentiation in z
};

/// Grid function: nodal values on a Grid1D.
struct GridFn {
  Grid1D grid;
  VectorXd v;
};

Grid1D make_grid(double half_length, int n_modes);
StripGrid make_strip(const Grid1D& base, int n_vertical);

/// Forward transform to Fourier coefficients c_n (FFT order), normalized so
/// that u(x) = sum_n c_n exp(i xi_n x).
VectorXcd fft(const Grid1D& g, const VectorXcd& u);
VectorXcd fft(const Grid1D& g, const VectorXd& u);
VectorXcd ifft(const Grid1D& g, const VectorXcd& c);

/// Fourier-multiplier derivative. The Nyquist coefficient is zeroed for odd
/// orders so that real input stays real and odd-order d/dx stays skew.
VectorXd spectral_derivative(const Grid1D& g, const VectorXd& u, int order = 1);
VectorXcd spectral_derivative(const Grid1D& g, const VectorXcd& u, int order = 1);

/// Apply an even real symbol m(|xi|, ...) given as values per FFT-ordered mode.
VectorXd apply_symbol(const Grid1D& g, const VectorXd& u, const VectorXd& symbol);

/// Quadrature inner product (u, v) = integral u conj(v), exact for trig polys.
complexd inner_product(const Grid1D& g, const VectorXcd& u, const VectorXcd& v);
double inner_product(const Grid1D& g, const VectorXd& u, const VectorXd& v);
double norm_l2(const Grid1D& g, const VectorXd& u);

/// L2 norm of sqrt(xi^2+k^2) / (1 + sqrt(xi^2+k^2))^(1/2) applied to u.
double weighted_seminorm(const Grid1D& g, const VectorXd& u, double k);

/// Dense spectral differentiation matrix consistent with spectral_derivative.
MatrixXd derivative_matrix(const Grid1D& g, int order = 1);

/// Nodal evaluation and coefficient-extraction matrices for the even (cosine)
/// and odd (sine) subspaces. cos modes m = 0..Nx/2, sin modes m = 1..Nx/2-1.
struct SymmetricBases {
  MatrixXd eval_cos;  // Nx x (Nx/2+1)
  MatrixXd eval_sin;  // Nx x (Nx/2-1)
  MatrixXd coef_cos;  // (Nx/2+1) x Nx
  MatrixXd coef_sin;  // (Nx/2-1) x Nx
};
SymmetricBases symmetric_bases(const Grid1D& g);

/// Reflection u(x) -> u(-x) on the periodic grid.
VectorXd reflect(const Grid1D& g, const VectorXd& u);

double max_abs(const VectorXd& u);

}  // namespace wavespec::grid
