#include "wavespec/dno.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>
#include <vector>
#include <cstdio>

#include "wavespec/linalg.hpp"

namespace wavespec::dno {

namespace {

std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

uint64_t fnv1a(const void* data, size_t n, uint64_t h = 1469598103934665603ull) {
  auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t digest_eta(const VectorXd& eta) {
  return fnv1a(eta.data(), sizeof(double) * eta.size());
}

// cosh(r (z+1)) / cosh(r) and its z-derivative, overflow-safe for large r.
double cosh_ratio(double r, double z) {
  return (std::exp(r * z) + std::exp(-r * (z + 2.0))) / (1.0 + std::exp(-2.0 * r));
}
double sinh_ratio(double r, double z) {  // sinh(r(z+1))/cosh(r)
  return (std::exp(r * z) - std::exp(-r * (z + 2.0))) / (1.0 + std::exp(-2.0 * r));
}

}  // namespace

Eigen::Matrix2d FlatteningMetric::inverse_metric_at(int ix, double z) const {
  Eigen::Matrix2d m;
  const double depth = 1.0 + eta(ix);
  const double off = -eta_x(ix) * (z + 1.0) / depth;
  m(0, 0) = 1.0;
  m(0, 1) = off;
  m(1, 0) = off;
  m(1, 1) = (1.0 + (z + 1.0) * (z + 1.0) * eta_x(ix) * eta_x(ix)) / (depth * depth);
  return m;
}

FlatteningMetric build_flattening(const GridFn& eta, const StripGrid& strip,
                                  double kappa) {
  if (eta.v.size() != strip.base.n_modes)
    throw ConfigError("build_flattening: eta does not match the strip grid");
  FlatteningMetric m;
  m.strip = strip;
  m.eta = eta.v;
  m.eta_x = grid::spectral_derivative(strip.base, eta.v, 1);
  m.min_depth = 1.0 + eta.v.minCoeff();
  if (m.min_depth <= kappa) {
    std::ostringstream os;
    os << "degenerate fluid domain: 1 + min(eta) = " << m.min_depth << " <= " << kappa;
    throw NumericalError(os.str());
  }
  return m;
}

double flat_dno_symbol(double xi, double k) {
  const double r = std::hypot(xi, k);
  return std::tanh(r) * r;
}

// ---------------------------------------------------------------------------
// Batched elliptic solver
// ---------------------------------------------------------------------------

struct DnoSolver::Impl {
  StripGrid strip;
  DnoOptions opt;
  int nx = 0, nz = 0, nxh = 0;
  VectorXd xi_half;  // xi_m = pi m / Lx, m = 0..nx/2

  // FFTW split-format plans must execute on the exact arrays they were
  // planned with (the re/im separation is baked into the plan), so each batch
  // size owns its buffers and plans for the solver's lifetime.
  struct BatchContext {
    MatrixXd freal;            // real field, (nz) x (nx*b), column col*nx+ix
    MatrixXd sre, sim;         // spectra, (nz) x (nxh*b), column m*b+col
    MatrixXd sre2, sim2;       // c2r input (destroyed by the transform)
    VectorXd line, lre, lim;   // boundary traces and their spectra
    fftw_plan field_r2c = nullptr;  // freal -> (sre, sim)
    fftw_plan field_c2r = nullptr;  // (sre2, sim2) -> freal
    fftw_plan line_r2c = nullptr;   // line -> (lre, lim)
    fftw_plan line_c2r = nullptr;   // (lre, lim) -> line
  };
  std::map<int, BatchContext> contexts;

  // Warm-start state for repeated matrix builds on the same surface.
  uint64_t warm_digest = 0;
  double warm_k = 0.0;
  bool has_warm = false;
  std::vector<MatrixXd> warm_blocks;

  Impl(const StripGrid& s, DnoOptions o) : strip(s), opt(o) {
    nx = strip.base.n_modes;
    nz = strip.n_vertical;
    nxh = nx / 2 + 1;
    xi_half.resize(nxh);
    for (int m = 0; m < nxh; ++m)
      xi_half(m) = M_PI * m / strip.base.half_length;
  }

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    for (auto& [b, c] : contexts) {
      if (c.field_r2c) fftw_destroy_plan(c.field_r2c);
      if (c.field_c2r) fftw_destroy_plan(c.field_c2r);
      if (c.line_r2c) fftw_destroy_plan(c.line_r2c);
      if (c.line_c2r) fftw_destroy_plan(c.line_c2r);
    }
  }

  BatchContext& context_for(int b) {
    auto it = contexts.find(b);
    if (it != contexts.end()) return it->second;
    BatchContext c;
    c.freal.setZero(nz, nx * b);
    c.sre.setZero(nz, nxh * b);
    c.sim.setZero(nz, nxh * b);
    c.sre2.setZero(nz, nxh * b);
    c.sim2.setZero(nz, nxh * b);
    c.line.setZero(nx * b);
    c.lre.setZero(nxh * b);
    c.lim.setZero(nxh * b);
    auto& slot = contexts.emplace(b, std::move(c)).first->second;
    std::lock_guard<std::mutex> lock(fftw_mutex());
    {
      fftw_iodim dim{nx, nz, b * nz};
      fftw_iodim hm[2] = {{nz, 1, 1}, {b, nx * nz, nz}};
      slot.field_r2c = fftw_plan_guru_split_dft_r2c(
          1, &dim, 2, hm, slot.freal.data(), slot.sre.data(), slot.sim.data(),
          FFTW_ESTIMATE);
      fftw_iodim dimi{nx, b * nz, nz};
      fftw_iodim hmi[2] = {{nz, 1, 1}, {b, nz, nx * nz}};
      slot.field_c2r = fftw_plan_guru_split_dft_c2r(
          1, &dimi, 2, hmi, slot.sre2.data(), slot.sim2.data(), slot.freal.data(),
          FFTW_ESTIMATE);
    }
    {
      fftw_iodim dim{nx, 1, b};
      fftw_iodim hm[1] = {{b, nx, 1}};
      slot.line_r2c = fftw_plan_guru_split_dft_r2c(
          1, &dim, 1, hm, slot.line.data(), slot.lre.data(), slot.lim.data(),
          FFTW_ESTIMATE);
      fftw_iodim dimi{nx, b, 1};
      fftw_iodim hmi[1] = {{b, 1, nx}};
      slot.line_c2r = fftw_plan_guru_split_dft_c2r(
          1, &dimi, 1, hmi, slot.lre.data(), slot.lim.data(), slot.line.data(),
          FFTW_ESTIMATE);
    }
    return slot;
  }

  // Solve one batch of boundary columns; returns flux (nx x b).
  // `warm` may carry the previous correction field for this batch (same
  // surface, nearby k); it is updated with the converged field.
  MatrixXd solve_batch(const VectorXd& eta, const VectorXd& eta_x, double k,
                       const Eigen::Ref<const MatrixXd>& u, MatrixXd* warm,
                       int* iters_out, double* update_out) {
    const int b = static_cast<int>(u.cols());
    auto& ctx = context_for(b);

    // Mode data.
    VectorXd r(nxh), symbol(nxh);
    for (int m = 0; m < nxh; ++m) {
      r(m) = std::hypot(xi_half(m), k);
      symbol(m) = std::tanh(r(m)) * r(m);
    }
    MatrixXd ch(nz, nxh), dch(nz, nxh);
    for (int m = 0; m < nxh; ++m)
      for (int iz = 0; iz < nz; ++iz) {
        ch(iz, m) = cosh_ratio(r(m), strip.z(iz));
        dch(iz, m) = r(m) * sinh_ratio(r(m), strip.z(iz));
      }

    // Boundary spectra (normalized so c2r returns nodal values).
    VectorXd u_re(nxh * b), u_im(nxh * b);
    {
      Eigen::Map<MatrixXd>(ctx.line.data(), nx, b) = u;
      fftw_execute(ctx.line_r2c);
      u_re = ctx.lre / nx;
      u_im = ctx.lim / nx;
    }
    const double scale = std::max(1e-300, u.cwiseAbs().maxCoeff());

    // Flat surface: the multiplier is exact, no correction needed.
    const bool flat = eta.cwiseAbs().maxCoeff() < 1e-14;

    // x-direction coefficient rows, replicated per column.
    VectorXd ce(nx), q0(nx), q2(nx), wk2(nx), fl1(nx), fl2(nx), cb(nx);
    for (int i = 0; i < nx; ++i) {
      const double d = 1.0 + eta(i);
      ce(i) = eta(i);
      cb(i) = -eta_x(i);
      q0(i) = -eta(i) / d;
      q2(i) = eta_x(i) * eta_x(i) / d;
      wk2(i) = k * k * eta(i);
      fl1(i) = -eta_x(i);
      fl2(i) = (1.0 + eta_x(i) * eta_x(i)) / d;
    }
    Eigen::RowVectorXd ce_r(nx * b), cb_r(nx * b), q0_r(nx * b), q2_r(nx * b),
        wk2_r(nx * b);
    for (int c = 0; c < b; ++c)
      for (int i = 0; i < nx; ++i) {
        ce_r(c * nx + i) = ce(i);
        cb_r(c * nx + i) = cb(i);
        q0_r(c * nx + i) = q0(i);
        q2_r(c * nx + i) = q2(i);
        wk2_r(c * nx + i) = wk2(i);
      }
    VectorXd zp1 = strip.z.array() + 1.0;
    VectorXd zp1sq = zp1.array().square();

    auto spectral_from_profile = [&](const MatrixXd& prof, MatrixXd& out_re,
                                     MatrixXd& out_im) {
      for (int m = 0; m < nxh; ++m) {
        out_re.middleCols(m * b, b).noalias() =
            prof.col(m) * Eigen::Map<const VectorXd>(u_re.data() + m * b, b).transpose();
        out_im.middleCols(m * b, b).noalias() =
            prof.col(m) * Eigen::Map<const VectorXd>(u_im.data() + m * b, b).transpose();
      }
    };
    auto dx_in_place = [&](MatrixXd& re, MatrixXd& im) {
      // multiply by i*xi; Nyquist zeroed
      for (int m = 0; m < nxh; ++m) {
        const double x = (m == nx / 2) ? 0.0 : xi_half(m);
        auto rb = re.middleCols(m * b, b);
        auto ib = im.middleCols(m * b, b);
        MatrixXd tmp = rb;
        rb = -x * ib;
        ib = x * tmp;
      }
    };
    auto to_real = [&](const MatrixXd& rein, const MatrixXd& imin, MatrixXd& out) {
      ctx.sre2 = rein;
      ctx.sim2 = imin;
      fftw_execute(ctx.field_c2r);
      out = ctx.freal;
    };
    auto to_spectral = [&](const MatrixXd& in, MatrixXd& outre, MatrixXd& outim) {
      ctx.freal = in;
      fftw_execute(ctx.field_r2c);
      outre = ctx.sre / nx;
      outim = ctx.sim / nx;
    };

    // Per-mode flat inverse with boundary rows (bottom Neumann, top Dirichlet).
    std::vector<MatrixXd> tinv;
    if (!flat) {
      tinv.reserve(nxh);
      MatrixXd dz2 = strip.dz * strip.dz;
      for (int m = 0; m < nxh; ++m) {
        MatrixXd t = -dz2;
        t.diagonal().array() += r(m) * r(m);
        t.row(0) = strip.dz.row(0);
        t.row(nz - 1).setZero();
        t(nz - 1, nz - 1) = 1.0;
        tinv.push_back(t.inverse());
      }
    }

    int iters = 0;
    double update = 0.0;
    MatrixXd v;  // correction field, real layout

    if (!flat) {
      // Source from the harmonic part, z-derivatives taken analytically.
      MatrixXd a_re(nz, nxh * b), a_im(nz, nxh * b);
      MatrixXd field_a(nz, nx * b), field_az(nz, nx * b), field_azz(nz, nx * b);
      MatrixXd field_ax(nz, nx * b), field_axz(nz, nx * b);

      spectral_from_profile(ch, a_re, a_im);
      to_real(a_re, a_im, field_a);
      dx_in_place(a_re, a_im);
      to_real(a_re, a_im, field_ax);

      spectral_from_profile(dch, a_re, a_im);
      to_real(a_re, a_im, field_az);
      dx_in_place(a_re, a_im);
      to_real(a_re, a_im, field_axz);

      MatrixXd prof_zz = ch.array().rowwise() * (r.array().square()).transpose();
      spectral_from_profile(prof_zz, a_re, a_im);
      to_real(a_re, a_im, field_azz);

      // S_H = d/dx(ce*A_x + cb*(z+1)*A_z) + cb*A_x + cb*(z+1)*A_xz
      //       + 2 q2 (z+1) A_z + (q0 + q2 (z+1)^2) A_zz - k^2 eta A.
      MatrixXd p = (field_ax.array().rowwise() * ce_r.array()).matrix() +
                   ((field_az.array().colwise() * zp1.array()).rowwise() * cb_r.array())
                       .matrix();
      MatrixXd pre(nz, nxh * b), pim(nz, nxh * b);
      to_spectral(p, pre, pim);
      dx_in_place(pre, pim);
      MatrixXd source(nz, nx * b);
      to_real(pre, pim, source);
      source += (field_ax.array().rowwise() * cb_r.array()).matrix();
      source += ((field_axz.array().colwise() * zp1.array()).rowwise() * cb_r.array())
                    .matrix();
      source += 2.0 * ((field_az.array().colwise() * zp1.array()).rowwise() * q2_r.array())
                          .matrix();
      source += (field_azz.array().rowwise() * q0_r.array()).matrix();
      source += ((field_azz.array().colwise() * zp1sq.array()).rowwise() * q2_r.array())
                    .matrix();
      source -= (field_a.array().rowwise() * wk2_r.array()).matrix();

      // Fixed-point iteration on the correction.
      v.setZero(nz, nx * b);
      if (warm && warm->rows() == nz && warm->cols() == nx * b) v = *warm;
      double prev_update = std::numeric_limits<double>::max();
      MatrixXd vx(nz, nx * b), vz(nz, nx * b), rhs(nz, nx * b);
      MatrixXd rre(nz, nxh * b), rim(nz, nxh * b), vre(nz, nxh * b), vim(nz, nxh * b);
      while (true) {
        ++iters;
        to_spectral(v, vre, vim);
        dx_in_place(vre, vim);
        to_real(vre, vim, vx);
        vz.noalias() = strip.dz * v;

        p = (vx.array().rowwise() * ce_r.array()).matrix() +
            ((vz.array().colwise() * zp1.array()).rowwise() * cb_r.array()).matrix();
        rhs = ((vx.array().colwise() * zp1.array()).rowwise() * cb_r.array()).matrix() +
              (vz.array().rowwise() * q0_r.array()).matrix() +
              ((vz.array().colwise() * zp1sq.array()).rowwise() * q2_r.array()).matrix();
        rhs = (strip.dz * rhs).eval();
        rhs -= (v.array().rowwise() * wk2_r.array()).matrix();
        rhs += source;

        to_spectral(p, pre, pim);
        dx_in_place(pre, pim);
        to_spectral(rhs, rre, rim);
        rre += pre;
        rim += pim;
        rre.row(0).setZero();
        rim.row(0).setZero();
        rre.row(nz - 1).setZero();
        rim.row(nz - 1).setZero();
        for (int m = 0; m < nxh; ++m) {
          vre.middleCols(m * b, b).noalias() = tinv[m] * rre.middleCols(m * b, b);
          vim.middleCols(m * b, b).noalias() = tinv[m] * rim.middleCols(m * b, b);
        }
        MatrixXd vnew(nz, nx * b);
        to_real(vre, vim, vnew);

        update = (vnew - v).cwiseAbs().maxCoeff() / scale;
        v = vnew;
        if (update <= opt.tol) break;
        if (update >= prev_update && update <= 1e3 * opt.tol) break;  // roundoff floor
        if (iters >= opt.max_iter) {
          std::ostringstream os;
          os << "DN elliptic correction did not converge: " << iters
             << " iterations, relative update " << update;
          throw NumericalError(os.str());
        }
        prev_update = update;
      }
      if (warm) *warm = v;
    }

    // Flux: -eta_x dx(psi)|0 + (1+eta_x^2)/(1+eta) dz(psi)|0.
    // dz psi|0 = tanh(r) r * u (harmonic part, exact) + Dz v|0.
    MatrixXd flux(nx, b);
    {
      for (int m = 0; m < nxh; ++m) {
        const double s = symbol(m);
        for (int c = 0; c < b; ++c) {
          ctx.lre(m * b + c) = s * u_re(m * b + c);
          ctx.lim(m * b + c) = s * u_im(m * b + c);
        }
      }
      fftw_execute(ctx.line_c2r);
      MatrixXd gz = Eigen::Map<MatrixXd>(ctx.line.data(), nx, b);
      if (!flat) {
        Eigen::RowVectorXd dz_top = strip.dz.row(nz - 1);
        MatrixXd vz_top = dz_top * v;  // 1 x (nx*b)
        for (int c = 0; c < b; ++c)
          gz.col(c) += Eigen::Map<const Eigen::RowVectorXd>(vz_top.data() + c * nx, nx)
                           .transpose();
      }
      for (int m = 0; m < nxh; ++m) {
        const double x = (m == nx / 2) ? 0.0 : xi_half(m);
        for (int c = 0; c < b; ++c) {
          const double re = u_re(m * b + c), im = u_im(m * b + c);
          ctx.lre(m * b + c) = -x * im;
          ctx.lim(m * b + c) = x * re;
        }
      }
      fftw_execute(ctx.line_c2r);
      MatrixXd ux = Eigen::Map<MatrixXd>(ctx.line.data(), nx, b);
      flux = (gz.array().colwise() * fl2.array()).matrix() +
             (ux.array().colwise() * fl1.array()).matrix();
    }

    if (iters_out) *iters_out = std::max(*iters_out, iters);
    if (update_out) *update_out = std::max(*update_out, update);
    return flux;
  }
};

DnoSolver::DnoSolver(const StripGrid& strip, DnoOptions opt)
    : impl_(std::make_unique<Impl>(strip, opt)) {}
DnoSolver::~DnoSolver() = default;
DnoSolver::DnoSolver(DnoSolver&&) noexcept = default;
DnoSolver& DnoSolver::operator=(DnoSolver&&) noexcept = default;

const StripGrid& DnoSolver::strip() const { return impl_->strip; }
const DnoOptions& DnoSolver::options() const { return impl_->opt; }

MatrixXd DnoSolver::apply(const VectorXd& eta, double k, const MatrixXd& u,
                          DnoDiagnostics* diag) {
  if (eta.size() != impl_->nx || u.rows() != impl_->nx)
    throw ConfigError("DnoSolver::apply: size mismatch");
  const double depth = 1.0 + eta.minCoeff();
  if (depth <= impl_->opt.kappa)
    throw NumericalError("degenerate fluid domain in DN solve");
  VectorXd eta_x = grid::spectral_derivative(impl_->strip.base, eta, 1);

  MatrixXd out(impl_->nx, u.cols());
  int iters = 0;
  double update = 0.0;
  const int batch = impl_->opt.batch;
  for (int start = 0; start < u.cols(); start += batch) {
    const int b = std::min<int>(batch, static_cast<int>(u.cols()) - start);
    out.middleCols(start, b) =
        impl_->solve_batch(eta, eta_x, k, u.middleCols(start, b), nullptr, &iters,
                           &update);
  }
  if (diag) {
    diag->iterations = iters;
    diag->final_update = update;
  }
  return out;
}

DnoRealization DnoSolver::matrix(const VectorXd& eta, double k) {
  auto& im = *impl_;
  const int nx = im.nx;
  if (eta.size() != nx) throw ConfigError("DnoSolver::matrix: size mismatch");
  const double depth = 1.0 + eta.minCoeff();
  if (depth <= im.opt.kappa)
    throw NumericalError("degenerate fluid domain in DN solve");
  VectorXd eta_x = grid::spectral_derivative(im.strip.base, eta, 1);

  const bool even = (eta - grid::reflect(im.strip.base, eta)).cwiseAbs().maxCoeff() <=
                    1e-12 * (1.0 + eta.cwiseAbs().maxCoeff());
  const int ncols = even ? nx / 2 + 1 : nx;

  const uint64_t dig = digest_eta(eta);
  const bool warm_ok = im.has_warm && im.warm_digest == dig &&
                       std::abs(k * k - im.warm_k * im.warm_k) <= 1.0;
  if (!warm_ok) im.warm_blocks.clear();

  MatrixXd g(nx, nx);
  int iters = 0;
  double update = 0.0;
  const int batch = im.opt.batch;
  int nblocks = (ncols + batch - 1) / batch;
  if (static_cast<int>(im.warm_blocks.size()) != nblocks)
    im.warm_blocks.assign(nblocks, MatrixXd());

  for (int blocki = 0, start = 0; start < ncols; start += batch, ++blocki) {
    const int b = std::min(batch, ncols - start);
    MatrixXd u = MatrixXd::Zero(nx, b);
    for (int c = 0; c < b; ++c) u(start + c, c) = 1.0;
    MatrixXd flux =
        im.solve_batch(eta, eta_x, k, u, &im.warm_blocks[blocki], &iters, &update);
    g.middleCols(start, b) = flux;
  }
  im.has_warm = true;
  im.warm_digest = dig;
  im.warm_k = k;

  if (even) {
    // G commutes with reflection: column for node (nx - j) is the reflection
    // of the column for node j.
    for (int j = nx / 2 + 1; j < nx; ++j) {
      const int src = nx - j;
      for (int i = 0; i < nx; ++i) g(i, j) = g((nx - i) % nx, src);
    }
  }

  DnoRealization out;
  out.grid = im.strip.base;
  out.eta = eta;
  out.k = k;
  out.iterations = iters;
  double gn = g.norm();
  out.asymmetry = gn > 0 ? (g - g.transpose()).norm() / gn : 0.0;
  if (out.asymmetry > im.opt.sym_tol) {
    std::ostringstream os;
    os << "DN realization asymmetry " << out.asymmetry << " exceeds " << im.opt.sym_tol;
    throw NumericalError(os.str());
  }
  out.matrix = 0.5 * (g + g.transpose());
  if (k == 0.0) {
    // Quotient out constants: G_{eps,0} 1 = 0 and range orthogonal to 1.
    VectorXd ones = VectorXd::Ones(nx);
    VectorXd rowmean = out.matrix * ones / nx;
    out.matrix -= rowmean * ones.transpose();
    VectorXd colmean = ones.transpose() * out.matrix / nx;
    out.matrix -= ones * colmean.transpose();
  }
  return out;
}

GridFn apply_dno(const GridFn& eta, double k, const GridFn& u, const StripGrid& strip) {
  DnoSolver solver(strip);
  GridFn out;
  out.grid = strip.base;
  out.v = solver.apply(eta.v, k, u.v);
  return out;
}

DnoRealization dno_matrix(const GridFn& eta, double k, const StripGrid& strip,
                          const DnoOptions& opt) {
  DnoSolver solver(strip, opt);
  return solver.matrix(eta.v, k);
}

GridFn frechet_dno(const GridFn& eta, const GridFn& phi, const GridFn& h, double k,
                   const StripGrid& strip) {
  const Grid1D& g = strip.base;
  DnoSolver solver(strip);
  VectorXd eta_x = grid::spectral_derivative(g, eta.v, 1);
  VectorXd phi_x = grid::spectral_derivative(g, phi.v, 1);
  VectorXd gphi = solver.apply(eta.v, k, phi.v);
  VectorXd z = (gphi + eta_x.cwiseProduct(phi_x)).array() /
               (1.0 + eta_x.array().square());
  VectorXd hz = h.v.cwiseProduct(z);
  VectorXd ghz = solver.apply(eta.v, k, hz);
  VectorXd trans = h.v.cwiseProduct(phi_x - z.cwiseProduct(eta_x));
  GridFn out;
  out.grid = g;
  out.v = -ghz - grid::spectral_derivative(g, trans, 1) + k * k * h.v.cwiseProduct(phi.v);
  return out;
}

std::pair<GridFn, GridFn> compute_Z_v(const GridFn& eta, const GridFn& phi,
                                      const StripGrid& strip) {
  const Grid1D& g = strip.base;
  DnoSolver solver(strip);
  VectorXd eta_x = grid::spectral_derivative(g, eta.v, 1);
  VectorXd phi_x = grid::spectral_derivative(g, phi.v, 1);
  VectorXd gphi = solver.apply(eta.v, 0.0, phi.v);
  GridFn z, v;
  z.grid = g;
  v.grid = g;
  z.v = (gphi + eta_x.cwiseProduct(phi_x)).array() / (1.0 + eta_x.array().square());
  v.v = phi_x - z.v.cwiseProduct(eta_x);
  return {z, v};
}

MatrixXd dno_matrix_direct(const GridFn& eta, double k, const StripGrid& strip) {
  const Grid1D& g = strip.base;
  const int nx = g.n_modes;
  const int nz = strip.n_vertical;
  const int n = nx * nz;
  if (n > 6000)
    throw ConfigError("dno_matrix_direct is a small-grid cross-check (Nx*Nz too large)");

  VectorXd eta_x = grid::spectral_derivative(g, eta.v, 1);
  MatrixXd dx = grid::derivative_matrix(g, 1);
  MatrixXd dxx = grid::derivative_matrix(g, 2);  // true -xi^2, Nyquist included

  // Tensor index iz + nz*ix. Build derivative operators.
  MatrixXd px = MatrixXd::Zero(n, n), pz = MatrixXd::Zero(n, n),
           pxx = MatrixXd::Zero(n, n);
  for (int ix = 0; ix < nx; ++ix)
    for (int jx = 0; jx < nx; ++jx)
      for (int iz = 0; iz < nz; ++iz) {
        px(iz + nz * ix, iz + nz * jx) = dx(ix, jx);
        pxx(iz + nz * ix, iz + nz * jx) = dxx(ix, jx);
      }
  for (int ix = 0; ix < nx; ++ix)
    for (int iz = 0; iz < nz; ++iz)
      for (int jz = 0; jz < nz; ++jz) pz(iz + nz * ix, jz + nz * ix) = strip.dz(iz, jz);

  // Split A = I + B so the flat Laplacian uses the full spectral d^2/dx^2
  // (the mode solver treats the Nyquist mode with its true xi^2).
  VectorXd b11(n), b12(n), b22(n), vol(n);
  for (int ix = 0; ix < nx; ++ix)
    for (int iz = 0; iz < nz; ++iz) {
      const int i = iz + nz * ix;
      const double zp1 = strip.z(iz) + 1.0;
      const double d = 1.0 + eta.v(ix);
      b11(i) = eta.v(ix);
      b12(i) = -eta_x(ix) * zp1;
      b22(i) = (zp1 * zp1 * eta_x(ix) * eta_x(ix) - eta.v(ix)) / d;
      vol(i) = d;
    }

  MatrixXd op = -pxx - pz * pz -
                (px * b11.asDiagonal() * px + px * b12.asDiagonal() * pz +
                 pz * b12.asDiagonal() * px + pz * b22.asDiagonal() * pz);
  op += (k * k) * MatrixXd(vol.asDiagonal());

  // Boundary rows: Dirichlet at z = 0 (iz = nz-1), Neumann at z = -1 (iz = 0).
  MatrixXd rhs = MatrixXd::Zero(n, nx);
  for (int ix = 0; ix < nx; ++ix) {
    const int top = (nz - 1) + nz * ix;
    op.row(top).setZero();
    op(top, top) = 1.0;
    rhs(top, ix) = 1.0;
    const int bot = 0 + nz * ix;
    op.row(bot) = pz.row(bot);
  }

  MatrixXd psi = linalg::solve(op, rhs);
  MatrixXd gx = px * psi, gz = pz * psi;
  MatrixXd out(nx, nx);
  for (int j = 0; j < nx; ++j)
    for (int ix = 0; ix < nx; ++ix) {
      const int top = (nz - 1) + nz * ix;
      out(ix, j) = -eta_x(ix) * gx(top, j) +
                   (1.0 + eta_x(ix) * eta_x(ix)) / (1.0 + eta.v(ix)) * gz(top, j);
    }
  return out;
}

}  // namespace wavespec::dno
