#include "wavespec/spectra.hpp"

#include <algorithm>
#include <cmath>

namespace wavespec::spectra {

namespace {

VectorXcd sort_desc_real(VectorXcd v) {
  std::vector<std::complex<double>> tmp(v.data(), v.data() + v.size());
  std::sort(tmp.begin(), tmp.end(), [](auto a, auto b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = tmp[i];
  return v;
}

double spectral_scale(const VectorXcd& eigs) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < eigs.size(); ++i) s = std::max(s, std::abs(eigs(i)));
  return s;
}

// Upper bound on the spectral radius (max absolute row sum).
double norm_bound(const MatrixXd& m) {
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

SpectrumReport eig_symmetric(const MatrixXd& m, const std::string& kind, double k,
                             const Tolerances& tol) {
  SpectrumReport rep;
  rep.kind = kind;
  rep.k = k;
  auto eig = linalg::eig_sym(m, false);
  rep.eigenvalues = sort_desc_real(eig.values.cast<std::complex<double>>());
  rep.scale = spectral_scale(rep.eigenvalues);
  const double thr = -tol.neg_tol_factor * rep.scale;
  rep.n_negative =
      static_cast<int>((eig.values.array() < thr).count());
  return rep;
}

SpectrumReport unstable_modes(const BlockOperator& jl, const Tolerances& tol,
                              bool want_vectors) {
  SpectrumReport rep;
  rep.kind = jl.kind == operators::BlockKind::JL ? "JL" : "JLambda";
  rep.k = jl.k;
  MatrixXd m = jl.full();
  auto eig = linalg::eig_general(m, want_vectors);
  rep.eigenvalues = sort_desc_real(eig.values);
  rep.scale = spectral_scale(rep.eigenvalues);
  const double re_tol = tol.re_tol_factor * rep.scale;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    if (eig.values(i).real() > re_tol) {
      UnstableMode mode;
      mode.sigma = eig.values(i).real();
      mode.imag_part = eig.values(i).imag();
      if (want_vectors) {
        // Unstable eigenvalues are real and simple; keep the real part.
        VectorXd vr = eig.vectors.col(i).real();
        double nrm = vr.norm();
        if (nrm > 0) vr /= nrm;
        mode.vector = vr;
      }
      rep.unstable.push_back(std::move(mode));
    }
  }
  std::sort(rep.unstable.begin(), rep.unstable.end(),
            [](const auto& a, const auto& b) { return a.sigma > b.sigma; });
  return rep;
}

GrowthEvaluator::GrowthEvaluator(const SolitaryWave& w, GProvider g_provider,
                                 Tolerances tol)
    : w_(w), g_(std::move(g_provider)), tol_(tol) {}

BlockOperator GrowthEvaluator::assemble_l(double k) {
  return operators::assemble_L(w_, k, g_(k));
}

SpectrumReport GrowthEvaluator::full_spectrum(double k, bool want_vectors) {
  BlockOperator l = assemble_l(k);
  return unstable_modes(operators::assemble_JL(l), tol_, want_vectors);
}

UnstableMode GrowthEvaluator::unstable_vector(double k, double sigma_hint) {
  BlockOperator l = assemble_l(k);
  MatrixXd a = operators::assemble_JL(l).full();
  auto [lambda, vec] = linalg::inverse_iteration(a, sigma_hint);
  UnstableMode mode;
  mode.sigma = lambda;
  mode.imag_part = 0.0;
  mode.vector = vec;
  return mode;
}

GrowthEvaluator::Sample GrowthEvaluator::evaluate(double k, bool want_f) {
  Sample s;
  s.k = k;
  BlockOperator l = assemble_l(k);
  MatrixXd lfull = l.full();
  const double scale = norm_bound(lfull);
  s.n_neg_l = linalg::eig_sym_count_below(lfull, -tol_.neg_tol_factor * scale);
  if (want_f) s.f_k = linalg::eig_sym_largest(operators::assemble_JLJ(l));

  if (k == 0.0) {
    // Certified count does not apply at k = 0 (translation kernel); use the
    // full nonsymmetric spectrum. sigma(0) = 0 to within re_tol.
    auto rep = unstable_modes(operators::assemble_JL(l), tol_);
    s.anchored = true;
    if (!rep.unstable.empty()) {
      s.sigma = rep.unstable.front().sigma;
      s.sigma_im = rep.unstable.front().imag_part;
    }
    return s;
  }

  if (s.n_neg_l == 0) {
    s.sigma = 0.0;  // no negative direction, no unstable eigenmode
    return s;
  }

  // Exactly one real unstable eigenvalue exists. Find it.
  MatrixXd a = operators::assemble_JL(l).full();
  bool ok = false;
  if (have_last_) {
    auto [lambda, vec] = linalg::inverse_iteration(a, last_sigma_);
    double resid = (a * vec - lambda * vec).norm();
    const double a_scale = norm_bound(a);
    if (std::isfinite(lambda) && lambda > tol_.re_tol_factor * a_scale &&
        resid <= 1e-10 * a_scale) {
      s.sigma = lambda;
      ok = true;
    }
  }
  if (!ok) {
    auto rep = unstable_modes(operators::assemble_JL(l), tol_);
    s.anchored = true;
    if (!rep.unstable.empty()) {
      s.sigma = rep.unstable.front().sigma;
      s.sigma_im = rep.unstable.front().imag_part;
      ok = true;
    }
  }
  if (ok && s.sigma > 0.0) {
    have_last_ = true;
    last_k_ = k;
    last_sigma_ = s.sigma;
  }
  return s;
}

GrowthCurve growth_curve(GrowthEvaluator& ev, const std::vector<double>& k_grid,
                         const GrowthCurveOptions& opt,
                         const std::vector<GrowthEvaluator::Sample>* precomputed) {
  GrowthCurve curve;
  curve.samples.reserve(k_grid.size());
  if (precomputed) {
    if (precomputed->size() != k_grid.size())
      throw ConfigError("growth_curve: precomputed samples do not match k_grid");
    curve.samples = *precomputed;
  } else {
    for (double k : k_grid) curve.samples.push_back(ev.evaluate(k));
  }

  // Longest contiguous run of unstable samples.
  int best_start = -1, best_len = 0;
  for (size_t i = 0; i < curve.samples.size();) {
    if (curve.samples[i].sigma > 0.0) {
      size_t j = i;
      while (j < curve.samples.size() && curve.samples[j].sigma > 0.0) ++j;
      if (static_cast<int>(j - i) > best_len) {
        best_len = static_cast<int>(j - i);
        best_start = static_cast<int>(i);
      }
      i = j;
    } else {
      ++i;
    }
  }
  if (best_start < 0) return curve;  // "no instability detected"
  curve.band_found = true;

  auto sigma_at = [&](double k) { return ev.evaluate(k, false).sigma; };

  // Band edges by bisection on detectability of the unstable eigenvalue.
  {
    double lo_out = best_start > 0 ? k_grid[best_start - 1] : 0.0;
    double lo_in = k_grid[best_start];
    while (lo_in - lo_out > opt.edge_tol) {
      double mid = 0.5 * (lo_in + lo_out);
      if (sigma_at(mid) > 0.0)
        lo_in = mid;
      else
        lo_out = mid;
    }
    curve.k_lo = lo_in;
    int last = best_start + best_len - 1;
    double hi_in = k_grid[last];
    double hi_out =
        last + 1 < static_cast<int>(k_grid.size()) ? k_grid[last + 1] : hi_in + 0.5;
    while (hi_out - hi_in > opt.edge_tol) {
      double mid = 0.5 * (hi_in + hi_out);
      if (sigma_at(mid) > 0.0)
        hi_in = mid;
      else
        hi_out = mid;
    }
    curve.k_hi = hi_in;
  }

  // Argmax refinement: start from the best sample, then parabolic steps.
  {
    int ibest = best_start;
    for (int i = best_start; i < best_start + best_len; ++i)
      if (curve.samples[i].sigma > curve.samples[ibest].sigma) ibest = i;
    double k0 = k_grid[ibest];
    double h = (curve.k_hi - curve.k_lo) / 8.0;
    double s0 = curve.samples[ibest].sigma;
    for (int round = 0; round < opt.argmax_rounds && h > 1e-6; ++round) {
      double km = std::max(curve.k_lo, k0 - h), kp = std::min(curve.k_hi, k0 + h);
      double sm = sigma_at(km), sp = sigma_at(kp);
      if (sm > s0 && sm >= sp) {
        k0 = km;
        s0 = sm;
      } else if (sp > s0) {
        k0 = kp;
        s0 = sp;
      } else {
        // parabolic vertex through (km, k0, kp)
        double denom = (sm - 2 * s0 + sp);
        if (std::abs(denom) > 0) {
          double step = 0.5 * h * (sm - sp) / denom;
          double kv = k0 + step;
          if (kv > curve.k_lo && kv < curve.k_hi) {
            double sv = sigma_at(kv);
            if (sv > s0) {
              k0 = kv;
              s0 = sv;
            }
          }
        }
        h *= 0.5;
      }
    }
    curve.k0 = k0;
    curve.sigma0 = s0;
  }

  // Second derivative and nondegeneracy order.
  {
    double w = 0.5 * (curve.k_hi - curve.k_lo);
    double h = std::max(opt.fd_step_frac * w, 1e-3);
    h = std::min({h, curve.k0 - curve.k_lo, curve.k_hi - curve.k0});
    double s0 = curve.sigma0;
    double s1m = sigma_at(curve.k0 - h), s1p = sigma_at(curve.k0 + h);
    double s2m = sigma_at(curve.k0 - 2 * h), s2p = sigma_at(curve.k0 + 2 * h);
    curve.sigma_pp =
        (-s2p + 16.0 * s1p - 30.0 * s0 + 16.0 * s1m - s2m) / (12.0 * h * h);
    const double pp_scale = curve.sigma0 / (w * w);
    if (std::abs(curve.sigma_pp) >= opt.m2_threshold * pp_scale &&
        curve.sigma_pp < 0.0) {
      curve.m_order = 2;
    } else {
      // fourth central difference
      double d4 = (s2p - 4.0 * s1p + 6.0 * s0 - 4.0 * s1m + s2m) / (h * h * h * h);
      const double d4_scale = curve.sigma0 / (w * w * w * w);
      curve.m_order = (std::abs(d4) >= opt.m2_threshold * d4_scale) ? 4 : -1;
    }
  }
  return curve;
}

FCurve f_curve(GrowthEvaluator& ev,
               const std::vector<GrowthEvaluator::Sample>& sweep,
               double bisect_tol) {
  FCurve out;
  out.samples.reserve(sweep.size());
  for (const auto& s : sweep) out.samples.emplace_back(s.k, s.f_k);
  for (size_t i = 1; i < out.samples.size(); ++i)
    if (out.samples[i].second >= out.samples[i - 1].second) out.monotone = false;

  auto f_at = [&](double k) {
    BlockOperator l = ev.assemble_l(k);
    return linalg::eig_sym_largest(operators::assemble_JLJ(l));
  };
  for (size_t i = 1; i < out.samples.size(); ++i) {
    if (out.samples[i - 1].second > 0.0 && out.samples[i].second <= 0.0) {
      double lo = out.samples[i - 1].first, hi = out.samples[i].first;
      while (hi - lo > bisect_tol) {
        double mid = 0.5 * (lo + hi);
        if (f_at(mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      out.k_star = 0.5 * (lo + hi);
      out.crossing_found = true;
      break;
    }
  }
  return out;
}

double essential_multiplier(const Params& p, double k, double gamma, double xi) {
  const double r = std::hypot(xi, k);
  const double denom = gamma + std::tanh(r) * r;
  double quotient;
  if (denom > 1e-300) {
    quotient = xi * xi / denom;
  } else {
    // xi, k, gamma all tiny: xi^2/(tanh r * r) -> 1 as xi -> 0 with k = 0.
    quotient = 1.0;
  }
  return p.beta * xi * xi + p.beta * k * k + p.alpha() + gamma - quotient;
}

double essential_bound_margin(const Params& p, double k, double gamma,
                              const VectorXd& xi_grid) {
  const double floor_val = p.beta * k * k + gamma + p.alpha() - 1.0;
  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < xi_grid.size(); ++i) {
    double m = essential_multiplier(p, k, gamma, xi_grid(i));
    margin = std::min(margin, m - floor_val);
  }
  return margin;
}

VectorXd kdv_limit_oracle(double beta, int n_modes) {
  const double c = std::sqrt(beta - 1.0 / 3.0);
  auto g = grid::make_grid(40.0 * c, n_modes);
  MatrixXd op = -(beta - 1.0 / 3.0) * grid::derivative_matrix(g, 2);
  for (int j = 0; j < n_modes; ++j) {
    double sech = 1.0 / std::cosh(g.nodes(j) / (2.0 * c));
    op(j, j) += 1.0 - 3.0 * sech * sech;
  }
  op = 0.5 * (op + op.transpose()).eval();
  auto eig = linalg::eig_sym(op, false);
  std::vector<double> below;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    if (eig.values(i) < 0.9) below.push_back(eig.values(i));
  return Eigen::Map<VectorXd>(below.data(), below.size());
}

KdvLimitRow kdv_limit_row(const SolitaryWave& w, const MatrixXd& g0_matrix) {
  MatrixXd a = operators::assemble_A_eps(w, g0_matrix);
  auto eig = linalg::eig_sym(a, false);
  KdvLimitRow row;
  row.eps = w.params.epsilon;
  const double e2 = w.params.epsilon * w.params.epsilon;
  // Smallest eigenvalue is lambda^-; the next one is the translation zero.
  row.lambda_neg_scaled = eig.values(0) / e2;
  row.lambda_zero_scaled = eig.values(1) / e2;
  return row;
}

double richardson_extrapolate(const std::vector<KdvLimitRow>& rows) {
  // rows ordered by decreasing eps, successive halvings expected.
  if (rows.size() < 2) return rows.empty() ? 0.0 : rows.back().lambda_neg_scaled;
  if (rows.size() == 2) {
    // assume first order in eps^... use p = 1 conservatively
    double a = rows[0].lambda_neg_scaled, b = rows[1].lambda_neg_scaled;
    return b + (b - a);
  }
  const size_t n = rows.size();
  double d1 = rows[n - 2].lambda_neg_scaled - rows[n - 3].lambda_neg_scaled;
  double d2 = rows[n - 1].lambda_neg_scaled - rows[n - 2].lambda_neg_scaled;
  double ratio = rows[n - 2].eps / rows[n - 1].eps;  // grid refinement factor
  double p = (d2 != 0.0 && d1 / d2 > 0.0) ? std::log(d1 / d2) / std::log(ratio) : 1.0;
  p = std::clamp(p, 0.5, 4.0);
  double rp = std::pow(ratio, p);
  return rows[n - 1].lambda_neg_scaled +
         (rows[n - 1].lambda_neg_scaled - rows[n - 2].lambda_neg_scaled) / (rp - 1.0);
}

SimilarityReport similarity_check(const SolitaryWave& w, double k,
                                  const MatrixXd& g_matrix, const Tolerances& tol) {
  SimilarityReport rep;
  BlockOperator l = operators::assemble_L(w, k, g_matrix);
  auto pair = operators::assemble_Lambda(w, k, g_matrix);

  auto rep_l = unstable_modes(operators::assemble_JL(l), tol, true);
  auto rep_lam = unstable_modes(operators::assemble_JL(pair.lambda), tol, false);

  if (rep_l.unstable.empty() && rep_lam.unstable.empty()) {
    rep.comparable = false;
    return rep;
  }
  rep.comparable = true;

  // Hausdorff distance between the unstable eigenvalue sets.
  auto dist =
      [](const std::vector<UnstableMode>& a, const std::vector<UnstableMode>& b) {
        double worst = 0.0;
        for (const auto& ma : a) {
          double best = std::numeric_limits<double>::infinity();
          for (const auto& mb : b)
            best = std::min(best, std::hypot(ma.sigma - mb.sigma,
                                             ma.imag_part - mb.imag_part));
          worst = std::max(worst, b.empty() ? ma.sigma : best);
        }
        return worst;
      };
  rep.spectrum_distance =
      std::max(dist(rep_l.unstable, rep_lam.unstable),
               dist(rep_lam.unstable, rep_l.unstable));

  // Eigenvector mapping: V = Q U solves JLambda V = sigma V.
  if (!rep_l.unstable.empty() && rep_l.unstable.front().vector.size() > 0) {
    const auto& mode = rep_l.unstable.front();
    VectorXd v = pair.q_mat * mode.vector;
    MatrixXd jlam = operators::assemble_JL(pair.lambda).full();
    rep.vector_residual = (jlam * v - mode.sigma * v).norm() / v.norm();
  }
  return rep;
}

double constrained_coercivity(const BlockOperator& l, const VectorXd& eta_neg,
                              const VectorXd& eta_zero, const grid::Grid1D& g) {
  const int n = static_cast<int>(eta_neg.size());
  MatrixXd lfull = l.full();

  // Constraint vectors in the 2n product space.
  int ncon = (l.k == 0.0) ? 3 : 2;
  MatrixXd c = MatrixXd::Zero(2 * n, ncon);
  c.col(0).head(n) = eta_neg;
  c.col(1).head(n) = eta_zero;
  if (ncon == 3) c.col(2).tail(n).setConstant(1.0);  // quotient H^{1/2}_*

  Eigen::HouseholderQR<MatrixXd> qr(c);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(2 * n, 2 * n);
  MatrixXd basis = q.rightCols(2 * n - ncon);

  // Weighted norm: |U1|_{H^1}^2 + |w_k U2|_{L^2}^2 + k^2/(1+|k|) |U2|^2.
  MatrixXd dx = grid::derivative_matrix(g, 1);
  MatrixXd weight = MatrixXd::Zero(2 * n, 2 * n);
  weight.topLeftCorner(n, n) = MatrixXd::Identity(n, n) + dx.transpose() * dx;
  VectorXd sym(n);
  for (int m = 0; m < n; ++m) {
    double r = std::hypot(g.wavenumbers(m), l.k);
    double wv = r / std::sqrt(1.0 + r);
    sym(m) = wv * wv + l.k * l.k / (1.0 + std::abs(l.k));
  }
  // Assemble the U2 weight as a Fourier symbol.
  MatrixXd w2(n, n);
  VectorXd e = VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e(j) = 1.0;
    w2.col(j) = grid::apply_symbol(g, e, sym);
    e(j) = 0.0;
  }
  weight.bottomRightCorner(n, n) = 0.5 * (w2 + w2.transpose());

  MatrixXd lr = basis.transpose() * lfull * basis;
  MatrixXd nr = basis.transpose() * weight * basis;
  lr = 0.5 * (lr + lr.transpose()).eval();
  nr = 0.5 * (nr + nr.transpose()).eval();

  Eigen::LLT<MatrixXd> llt(nr);
  if (llt.info() != Eigen::Success)
    throw NumericalError("constrained_coercivity: weight matrix not SPD");
  MatrixXd rinv = MatrixXd::Identity(lr.rows(), lr.cols());
  rinv = llt.matrixU().solve<Eigen::OnTheRight>(rinv);  // R^{-1}
  MatrixXd m = rinv.transpose() * lr * rinv;
  m = 0.5 * (m + m.transpose()).eval();
  auto eig = linalg::eig_sym(m, false);
  return eig.values(0);
}

}  // namespace wavespec::spectra
