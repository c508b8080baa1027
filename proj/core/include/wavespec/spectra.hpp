#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavespec/operators.hpp"

namespace wavespec::spectra {

using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using operators::BlockOperator;
using solitary::SolitaryWave;

struct Tolerances {
  double re_tol_factor = 1e-6;   // unstable threshold, times the spectral scale
  double neg_tol_factor = 1e-8;  // negative-count threshold, times the scale
  double im_tol_factor = 1e-8;   // realness check on unstable eigenvalues
};

struct UnstableMode {
  double sigma = 0.0;
  double imag_part = 0.0;
  VectorXd vector;  // may be empty
};

struct SpectrumReport {
  std::string kind;
  double k = 0.0;
  VectorXcd eigenvalues;  // sorted by descending real part
  double scale = 0.0;     // max |eigenvalue|
  int n_negative = -1;    // symmetric kinds only
  std::vector<UnstableMode> unstable;
};

/// Full real symmetric eigendecomposition with a negative count below
/// -neg_tol_factor * scale.
SpectrumReport eig_symmetric(const MatrixXd& m, const std::string& kind, double k,
                             const Tolerances& tol = {});

/// General eigensolve of a JL-type operator; the unstable set is filtered by
/// Re > re_tol_factor * scale.
SpectrumReport unstable_modes(const BlockOperator& jl, const Tolerances& tol = {},
                              bool want_vectors = false);

/// Provides G_{eps,k} realizations; the caller owns caching.
using GProvider = std::function<MatrixXd(double k)>;

/// Growth-rate evaluations along k with a certified fast path: for k != 0 the
/// finite-dimensional symplectic count (one negative direction of L(k) implies
/// exactly one real unstable eigenvalue of JL(k), none implies stability)
/// selects where an eigenvalue search is needed; the eigenvalue itself is
/// found by shifted inverse iteration continued in k, anchored by a full
/// nonsymmetric solve at the first unstable sample.
class GrowthEvaluator {
 public:
  GrowthEvaluator(const SolitaryWave& w, GProvider g_provider, Tolerances tol = {});

  struct Sample {
    double k = 0.0;
    double sigma = 0.0;     // max growth rate (0 when stable)
    double sigma_im = 0.0;  // imaginary part of the unstable eigenvalue
    int n_neg_l = 0;        // negative count of L(k)
    double f_k = 0.0;       // largest eigenvalue of J L(k) J (if requested)
    bool anchored = false;  // true when a full eigensolve was used
  };

  Sample evaluate(double k, bool want_f = true);
  SpectrumReport full_spectrum(double k, bool want_vectors = false);
  /// Unstable eigenvector by inverse iteration at a known sigma.
  UnstableMode unstable_vector(double k, double sigma_hint);
  BlockOperator assemble_l(double k);
  const SolitaryWave& wave() const { return w_; }
  const Tolerances& tolerances() const { return tol_; }
  void reset_continuation() { have_last_ = false; }

 private:
  const SolitaryWave& w_;
  GProvider g_;
  Tolerances tol_;
  bool have_last_ = false;
  double last_k_ = 0.0, last_sigma_ = 0.0;
};

struct GrowthCurve {
  std::vector<GrowthEvaluator::Sample> samples;  // on the requested grid
  bool band_found = false;
  double k_lo = 0.0, k_hi = 0.0;  // detectability edges of the unstable band
  double k0 = 0.0;                // argmax (smallest in case of ties)
  double sigma0 = 0.0;
  double sigma_pp = 0.0;          // d2 sigma/dk2 at k0
  int m_order = 0;                // 2 or 4; -1 when not classified
};

struct GrowthCurveOptions {
  double edge_tol = 1e-4;      // bisection tolerance on the band edges
  int argmax_rounds = 24;      // parabolic refinement iterations
  double fd_step_frac = 0.05;  // sigma'' step as a fraction of band width
  double m2_threshold = 1e-2;  // |sigma''| vs sigma0/half_width^2
};

/// When `precomputed` is given it must match k_grid; the sweep is skipped and
/// only the refinements run (lets callers parallelize the sweep).
GrowthCurve growth_curve(GrowthEvaluator& ev, const std::vector<double>& k_grid,
                         const GrowthCurveOptions& opt = {},
                         const std::vector<GrowthEvaluator::Sample>* precomputed =
                             nullptr);

struct FCurve {
  std::vector<std::pair<double, double>> samples;  // (k, f(k))
  bool crossing_found = false;
  double k_star = 0.0;  // first zero of f
  bool monotone = true;
};

/// f(k) = sup spec(J L(k) J): positive at k = 0, strictly decreasing, and its
/// first zero marks the bifurcation where the unstable mode disappears.
/// Sample values come from the sweep; only the crossing is refined here.
FCurve f_curve(GrowthEvaluator& ev,
               const std::vector<GrowthEvaluator::Sample>& sweep,
               double bisect_tol = 1e-4);

/// Essential-spectrum multiplier
///   m(xi) = beta xi^2 + beta k^2 + alpha + gamma
///           - xi^2 / (gamma + tanh(r) r),   r = sqrt(xi^2 + k^2),
/// evaluated with the continuous limit at xi = k = gamma = 0. Returns the
/// minimum over the grid of m(xi) - (beta k^2 + gamma + alpha - 1).
double essential_bound_margin(const Params& p, double k, double gamma,
                              const VectorXd& xi_grid);
double essential_multiplier(const Params& p, double k, double gamma, double xi);

/// Dense eigensolve of the KdV linearization
///   -(beta - 1/3) d^2/dx^2 + 1 - 3 sech^2(x / (2 sqrt(beta-1/3))),
/// the rescaled limit of A_eps. Returns the point spectrum below the
/// essential edge 1 (analytically -5/4, 0, 3/4).
VectorXd kdv_limit_oracle(double beta, int n_modes = 512);

struct KdvLimitRow {
  double eps = 0.0;
  double lambda_neg_scaled = 0.0;   // lambda^- / eps^2
  double lambda_zero_scaled = 0.0;  // lambda^0 / eps^2
};

KdvLimitRow kdv_limit_row(const SolitaryWave& w, const MatrixXd& g0_matrix);

/// Richardson extrapolation of lambda^-/eps^2 over decreasing eps; the
/// observed order is estimated from the sample ratios.
double richardson_extrapolate(const std::vector<KdvLimitRow>& rows);

struct SimilarityReport {
  double spectrum_distance = 0.0;  // Hausdorff distance of the unstable sets
  double vector_residual = 0.0;    // || JLambda (Q U) - sigma Q U || / ||Q U||
  bool comparable = false;         // at least one unstable mode found
};

/// Conjugation check: JL(k) and JLambda(k) share their unstable spectrum and
/// eigenvectors map through Q.
SimilarityReport similarity_check(const SolitaryWave& w, double k,
                                  const MatrixXd& g_matrix,
                                  const Tolerances& tol = {});

/// Minimum Rayleigh quotient of L(k) over the subspace orthogonal to the
/// constraint vectors (U1 against eta^- and eta^0; at k = 0 also the constant
/// direction of U2), measured against the natural weighted norm.
double constrained_coercivity(const BlockOperator& l, const VectorXd& eta_neg,
                              const VectorXd& eta_zero, const grid::Grid1D& g);

}  // namespace wavespec::spectra
