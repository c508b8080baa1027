#include "wavespec/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace wavespec::grid {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FFTW plans are cached per size; plan creation is not thread safe.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  PlanPair p;
  VectorXcd a(n), b(n);
  p.fwd = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                           reinterpret_cast<fftw_complex*>(b.data()), FFTW_FORWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(a.data()),
                           reinterpret_cast<fftw_complex*>(b.data()), FFTW_BACKWARD,
                           FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(n, p).first->second;
}

VectorXd cheb_nodes_01(int n) {
  // CGL nodes on [-1, 0], ascending: z_0 = -1, z_{n-1} = 0.
  VectorXd z(n);
  const int m = n - 1;
  for (int i = 0; i < n; ++i) z(i) = 0.5 * (std::cos(kPi * (m - i) / m) - 1.0);
  z(0) = -1.0;
  z(n - 1) = 0.0;
  return z;
}

MatrixXd cheb_diff_01(const VectorXd& z) {
  // Standard CGL differentiation matrix in barycentric form on the mapped
  // nodes; exact for polynomials of degree n-1.
  const int n = static_cast<int>(z.size());
  VectorXd c(n);
  for (int i = 0; i < n; ++i) {
    c(i) = (i == 0 || i == n - 1) ? 2.0 : 1.0;
    if (i % 2 == 1) c(i) = -c(i);
  }
  MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (c(i) / c(j)) / (z(i) - z(j));
      row_sum += d(i, j);
    }
    d(i, i) = -row_sum;  // negative sum trick
  }
  return d;
}

}  // namespace

Grid1D make_grid(double half_length, int n_modes) {
  if (half_length <= 0.0) throw ConfigError("Lx must be positive");
  if (n_modes < 16) throw ConfigError("Nx must be at least 16");
  if (n_modes % 2 != 0) throw ConfigError("Nx must be even");
  Grid1D g;
  g.half_length = half_length;
  g.n_modes = n_modes;
  g.nodes.resize(n_modes);
  for (int j = 0; j < n_modes; ++j)
    g.nodes(j) = -half_length + 2.0 * half_length * j / n_modes;
  g.wavenumbers.resize(n_modes);
  for (int n = 0; n < n_modes; ++n) {
    int m = (n <= n_modes / 2 - 1) ? n : n - n_modes;
    if (n == n_modes / 2) m = -n_modes / 2;
    g.wavenumbers(n) = kPi * m / half_length;
  }
  return g;
}

StripGrid make_strip(const Grid1D& base, int n_vertical) {
  if (n_vertical < 8) throw ConfigError("Nz must be at least 8");
  StripGrid s;
  s.base = base;
  s.n_vertical = n_vertical;
  s.z = cheb_nodes_01(n_vertical);
  s.dz = cheb_diff_01(s.z);
  return s;
}

VectorXcd fft(const Grid1D& g, const VectorXcd& u) {
  const int n = g.n_modes;
  VectorXcd in = u, out(n);
  auto& p = plans_for(n);
  fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  // FFTW forward sums e^{-2 pi i j n / N}; nodes start at -Lx, so mode n picks
  // up the phase e^{-i xi_n (-Lx)} = (-1)^n relative to the x_j = 2Lx j/Nx grid.
  for (int m = 0; m < n; ++m) {
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    out(m) *= sign / n;
  }
  return out;
}

VectorXcd fft(const Grid1D& g, const VectorXd& u) {
  return fft(g, VectorXcd(u.cast<complexd>()));
}

VectorXcd ifft(const Grid1D& g, const VectorXcd& c) {
  const int n = g.n_modes;
  VectorXcd in(n), out(n);
  for (int m = 0; m < n; ++m) {
    double sign = (m % 2 == 0) ? 1.0 : -1.0;
    in(m) = c(m) * sign;
  }
  auto& p = plans_for(n);
  fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

VectorXcd spectral_derivative(const Grid1D& g, const VectorXcd& u, int order) {
  if (order < 1) throw ConfigError("derivative order must be >= 1");
  VectorXcd c = fft(g, u);
  const int nyq = g.nyquist_index();
  for (int m = 0; m < g.n_modes; ++m) {
    if (m == nyq && order % 2 == 1) {
      c(m) = 0.0;
      continue;
    }
    c(m) *= std::pow(complexd(0.0, g.wavenumbers(m)), order);
  }
  return ifft(g, c);
}

VectorXd spectral_derivative(const Grid1D& g, const VectorXd& u, int order) {
  return spectral_derivative(g, VectorXcd(u.cast<complexd>()), order).real();
}

VectorXd apply_symbol(const Grid1D& g, const VectorXd& u, const VectorXd& symbol) {
  VectorXcd c = fft(g, u);
  c.array() *= symbol.array().cast<complexd>();
  return ifft(g, c).real();
}

complexd inner_product(const Grid1D& g, const VectorXcd& u, const VectorXcd& v) {
  if (u.size() != v.size() || u.size() != g.n_modes)
    throw ConfigError("inner_product: grid mismatch");
  return g.spacing() * u.dot(v);  // Eigen dot conjugates the first argument
}

double inner_product(const Grid1D& g, const VectorXd& u, const VectorXd& v) {
  if (u.size() != v.size() || u.size() != g.n_modes)
    throw ConfigError("inner_product: grid mismatch");
  return g.spacing() * u.dot(v);
}

double norm_l2(const Grid1D& g, const VectorXd& u) {
  return std::sqrt(g.spacing()) * u.norm();
}

double weighted_seminorm(const Grid1D& g, const VectorXd& u, double k) {
  VectorXcd c = fft(g, u);
  double acc = 0.0;
  for (int m = 0; m < g.n_modes; ++m) {
    double r = std::hypot(g.wavenumbers(m), k);
    double w = r / std::sqrt(1.0 + r);
    acc += w * w * std::norm(c(m));
  }
  return std::sqrt(2.0 * g.half_length * acc);
}

MatrixXd derivative_matrix(const Grid1D& g, int order) {
  const int n = g.n_modes;
  MatrixXd d(n, n);
  VectorXd e = VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e(j) = 1.0;
    d.col(j) = spectral_derivative(g, e, order);
    e(j) = 0.0;
  }
  // The first-order matrix is skew by construction; symmetrize exactly.
  if (order % 2 == 1) d = 0.5 * (d - d.transpose()).eval();
  return d;
}

SymmetricBases symmetric_bases(const Grid1D& g) {
  const int n = g.n_modes;
  const int nc = n / 2 + 1;
  const int ns = n / 2 - 1;
  SymmetricBases b;
  b.eval_cos.resize(n, nc);
  b.eval_sin.resize(n, ns);
  b.coef_cos.resize(nc, n);
  b.coef_sin.resize(ns, n);
  for (int m = 0; m < nc; ++m) {
    double w = (m == 0 || m == n / 2) ? 1.0 : 2.0;
    for (int j = 0; j < n; ++j) {
      double cm = std::cos(m * kPi * g.nodes(j) / g.half_length);
      b.eval_cos(j, m) = cm;
      b.coef_cos(m, j) = w * cm / n;
    }
  }
  for (int m = 1; m <= ns; ++m) {
    for (int j = 0; j < n; ++j) {
      double sm = std::sin(m * kPi * g.nodes(j) / g.half_length);
      b.eval_sin(j, m - 1) = sm;
      b.coef_sin(m - 1, j) = 2.0 * sm / n;
    }
  }
  return b;
}

VectorXd reflect(const Grid1D& g, const VectorXd& u) {
  const int n = g.n_modes;
  VectorXd r(n);
  for (int j = 0; j < n; ++j) r(j) = u((n - j) % n);
  return r;
}

double max_abs(const VectorXd& u) { return u.cwiseAbs().maxCoeff(); }

}  // namespace wavespec::grid
