#pragma once

#include "wavespec/spectra.hpp"

namespace wavespec::evolution {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using operators::BlockOperator;

/// Superposition of unstable eigenmodes over a window I of transverse
/// wavenumbers together with the mirror window -I, so the physical packet
/// int_I e^{sigma(k) t} e^{iky} U(k) dk + c.c. is real valued.
///
/// Samples are uniformly spaced and snapped onto multiples of dk, which makes
/// the packet 2 pi / dk periodic in y and the cosine modes orthogonal over one
/// period; the L2(x,y) norm then reduces to a weighted sum over the samples.
struct WavePacket {
  grid::Grid1D grid;
  std::vector<double> k_samples;  // positive side of the window
  std::vector<double> sigmas;
  std::vector<double> weights;    // composite Simpson, include dk
  MatrixXd modes;                 // (2 Nx) x nk, unit L2, sign-aligned in k
  double dk = 0.0;
  double y_period = 0.0;
  double k0 = 0.0, sigma0 = 0.0;
  int m_order = 2;

  /// Discrete L2(x, y) norm over one y-period at time t.
  double norm_at(double t) const;

  /// Physical-space synthesis of one component (0 -> U1, 1 -> U2) on the
  /// given y nodes; imaginary parts are a roundoff diagnostic.
  MatrixXcd assemble_component(double t, const VectorXd& y_nodes,
                               int component) const;
};

struct PacketOptions {
  int nk = 33;                // samples in I (odd for Simpson; 1 = single mode)
  double window_frac = 0.25;  // half-width of I as a fraction of the band width
  bool one_sided = false;     // I = [k0, k0 + 2w] instead of [k0 - w, k0 + w]
  double min_overlap = 0.9;   // adjacent-mode overlap guard
  bool auto_refine = false;   // double nk until the t=0 norm settles
  double refine_tol = 1e-6;
  int max_refinements = 1;
};

WavePacket build_wavepacket(const spectra::GrowthCurve& curve,
                            spectra::GrowthEvaluator& ev, const PacketOptions& opt);

struct GrowthFit {
  double sigma_fit = 0.0;  // coefficient of t
  double rho_fit = 0.0;    // coefficient of -log(1+t)
  double offset = 0.0;
  double max_residual = 0.0;  // of the linear fit, in log norm
};

/// Least-squares fit of log||U0(t)|| against sigma t - rho log(1+t) + const.
GrowthFit packet_growth_fit(const WavePacket& p, const VectorXd& t_grid);

struct EvolveOptions {
  enum class Propagator { EigenDecomposition, Midpoint };
  Propagator propagator = Propagator::EigenDecomposition;
  double cond_limit = 1e12;  // eigenbasis conditioning guard
  int substeps = 1;          // midpoint substeps per output interval
  bool store_states = false;
};

struct Trajectory {
  VectorXd times;
  std::vector<double> norms;      // L2 norms of V(t)
  std::vector<double> quad_form;  // (L(k) V, V), conserved by the flow
  MatrixXd states;                // columns per time when requested
  bool fell_back = false;         // eigenbasis was too ill-conditioned
};

/// Evolve dV/dt = J L(k) V on [0, t_end] with n_out output intervals.
Trajectory linear_evolve(const BlockOperator& l, const VectorXd& v0, double t_end,
                         int n_out, const EvolveOptions& opt = {});

}  // namespace wavespec::evolution
