#include "wavespec/evolution.hpp"

#include <cmath>
#include <sstream>

namespace wavespec::evolution {

double WavePacket::norm_at(double t) const {
  // ||U0||^2 = 2 L_y sum_j w_j^2 e^{2 sigma_j t} with unit modes.
  double acc = 0.0;
  for (size_t j = 0; j < k_samples.size(); ++j)
    acc += weights[j] * weights[j] * std::exp(2.0 * sigmas[j] * t);
  return std::sqrt(2.0 * y_period * acc);
}

MatrixXcd WavePacket::assemble_component(double t, const VectorXd& y_nodes,
                                         int component) const {
  const int nx = grid.n_modes;
  const int ny = static_cast<int>(y_nodes.size());
  MatrixXcd field = MatrixXcd::Zero(nx, ny);
  for (size_t j = 0; j < k_samples.size(); ++j) {
    VectorXd u = modes.col(j).segment(component * nx, nx);
    double amp = weights[j] * std::exp(sigmas[j] * t);
    for (int m = 0; m < ny; ++m) {
      std::complex<double> phase(std::cos(k_samples[j] * y_nodes(m)),
                                 std::sin(k_samples[j] * y_nodes(m)));
      // e^{iky} U + e^{-iky} conj(U); the modes are real.
      field.col(m) += amp * (phase + std::conj(phase)) * u;
    }
  }
  return field;
}

WavePacket build_wavepacket(const spectra::GrowthCurve& curve,
                            spectra::GrowthEvaluator& ev, const PacketOptions& opt) {
  if (!curve.band_found)
    throw NumericalError("build_wavepacket: no unstable band detected");
  if (opt.nk != 1 && (opt.nk < 3 || opt.nk % 2 == 0))
    throw ConfigError("packet nk must be 1 or an odd number >= 3");

  const double width = curve.k_hi - curve.k_lo;
  const double w = opt.window_frac * width;

  auto build = [&](int nk) {
    WavePacket p;
    p.grid = ev.wave().grid;
    p.k0 = curve.k0;
    p.sigma0 = curve.sigma0;
    p.m_order = curve.m_order;

    double a, b;
    if (opt.one_sided) {
      a = curve.k0;
      b = std::min(curve.k0 + 2.0 * w, curve.k_hi);
    } else {
      a = std::max(curve.k0 - w, curve.k_lo);
      b = std::min(curve.k0 + w, curve.k_hi);
    }
    if (nk == 1) {
      p.dk = 1.0;
      p.y_period = 2.0 * M_PI;
      p.k_samples = {curve.k0};
      p.weights = {1.0};
    } else {
      double dk = (b - a) / (nk - 1);
      // Periodicity in y requires every sample to be a multiple of dk.
      a = std::round(a / dk) * dk;
      p.dk = dk;
      p.y_period = 2.0 * M_PI / dk;
      for (int j = 0; j < nk; ++j) p.k_samples.push_back(a + j * dk);
      for (int j = 0; j < nk; ++j) {
        double c = (j == 0 || j == nk - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
        p.weights.push_back(c * dk / 3.0);
      }
    }

    ev.reset_continuation();
    const int nk_actual = static_cast<int>(p.k_samples.size());
    for (int j = 0; j < nk_actual; ++j) {
      double kj = p.k_samples[j];
      auto s = ev.evaluate(kj, false);
      if (s.sigma <= 0.0) {
        std::ostringstream os;
        os << "packet sample k = " << kj << " is not unstable";
        throw NumericalError(os.str());
      }
      auto mode = ev.unstable_vector(kj, s.sigma);
      p.sigmas.push_back(mode.sigma);
      if (p.modes.size() == 0) p.modes.resize(mode.vector.size(), nk_actual);
      p.modes.col(j) = mode.vector;
    }
    return p;
  };

  WavePacket p = build(opt.nk);

  // L2 normalization and sign alignment along k.
  const double h = p.grid.spacing();
  for (int j = 0; j < static_cast<int>(p.k_samples.size()); ++j) {
    double nrm = std::sqrt(h) * p.modes.col(j).norm();
    p.modes.col(j) /= nrm;
    if (j > 0) {
      double overlap = h * p.modes.col(j - 1).dot(p.modes.col(j));
      if (overlap < 0) {
        p.modes.col(j) *= -1.0;
        overlap = -overlap;
      }
      if (overlap < opt.min_overlap) {
        std::ostringstream os;
        os << "eigenmode branch discontinuity between k = " << p.k_samples[j - 1]
           << " and " << p.k_samples[j] << " (overlap " << overlap << ")";
        throw NumericalError(os.str());
      }
    }
  }

  if (opt.auto_refine && opt.nk >= 3) {
    double n0 = p.norm_at(0.0);
    int nk = opt.nk;
    for (int r = 0; r < opt.max_refinements; ++r) {
      nk = 2 * nk - 1;
      WavePacket p2 = build(nk);
      for (int j = 0; j < static_cast<int>(p2.k_samples.size()); ++j) {
        double nrm = std::sqrt(h) * p2.modes.col(j).norm();
        p2.modes.col(j) /= nrm;
        if (j > 0 && h * p2.modes.col(j - 1).dot(p2.modes.col(j)) < 0)
          p2.modes.col(j) *= -1.0;
      }
      double n1 = p2.norm_at(0.0);
      bool settled = std::abs(n1 - n0) <= opt.refine_tol * n0;
      p = std::move(p2);
      n0 = n1;
      if (settled) break;
    }
  }
  return p;
}

GrowthFit packet_growth_fit(const WavePacket& p, const VectorXd& t_grid) {
  const int n = static_cast<int>(t_grid.size());
  if (n < 4) throw ConfigError("packet_growth_fit needs at least 4 times");
  MatrixXd a(n, 3);
  VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = t_grid(i);
    a(i, 2) = -std::log1p(t_grid(i));
    b(i) = std::log(p.norm_at(t_grid(i)));
  }
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(0) >
      1e10 * svd.singularValues()(svd.singularValues().size() - 1))
    throw NumericalError("packet_growth_fit: time range too short, fit ill posed");
  VectorXd coef = svd.solve(b);
  GrowthFit fit;
  fit.offset = coef(0);
  fit.sigma_fit = coef(1);
  fit.rho_fit = coef(2);
  fit.max_residual = (a * coef - b).cwiseAbs().maxCoeff();
  return fit;
}

Trajectory linear_evolve(const BlockOperator& l, const VectorXd& v0, double t_end,
                         int n_out, const EvolveOptions& opt) {
  Trajectory traj;
  const int n = static_cast<int>(v0.size());
  MatrixXd lfull = l.full();
  MatrixXd a = operators::assemble_JL(l).full();
  const double h_weight = 1.0;  // constant factors cancel in every reported ratio

  traj.times = VectorXd::LinSpaced(n_out + 1, 0.0, t_end);
  if (opt.store_states) traj.states.resize(n, n_out + 1);

  auto record = [&](int idx, const VectorXd& v) {
    traj.norms.push_back(v.norm());
    traj.quad_form.push_back(h_weight * v.dot(lfull * v));
    if (opt.store_states) traj.states.col(idx) = v;
  };

  bool use_eigen = opt.propagator == EvolveOptions::Propagator::EigenDecomposition;
  if (use_eigen) {
    auto eig = linalg::eig_general(a, true);
    Eigen::PartialPivLU<MatrixXcd> lu(eig.vectors);
    double rc = lu.rcond();
    if (!(rc > 1.0 / opt.cond_limit)) {
      traj.fell_back = true;
      use_eigen = false;
    } else {
      VectorXcd coef = lu.solve(v0.cast<std::complex<double>>());
      for (int i = 0; i <= n_out; ++i) {
        double t = traj.times(i);
        VectorXcd amp = (eig.values.array() * t).exp() * coef.array();
        VectorXd v = (eig.vectors * amp).real();
        record(i, v);
      }
      return traj;
    }
  }

  // Implicit midpoint: (I - dt/2 A) V_{n+1} = (I + dt/2 A) V_n. Preserves the
  // quadratic invariant (L V, V) exactly for this linear Hamiltonian system.
  const int sub = std::max(1, opt.substeps);
  const double dt = t_end / (static_cast<double>(n_out) * sub);
  MatrixXd mlhs = MatrixXd::Identity(n, n) - 0.5 * dt * a;
  MatrixXd mrhs = MatrixXd::Identity(n, n) + 0.5 * dt * a;
  linalg::LuFactor lu(mlhs);
  VectorXd v = v0;
  record(0, v);
  for (int i = 1; i <= n_out; ++i) {
    for (int s = 0; s < sub; ++s) v = lu.solve(VectorXd(mrhs * v));
    record(i, v);
  }
  return traj;
}

}  // namespace wavespec::evolution
