// Scratch driver used while bringing the solver up; replaced by real suites.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "wavespec/dno.hpp"
#include "wavespec/grid.hpp"

using namespace wavespec;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using clock_t_ = std::chrono::steady_clock;

static double secs(clock_t_::time_point a, clock_t_::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int main() {
  // curved DN correctness, small grid
  auto g2 = grid::make_grid(10.0, 48);
  auto strip2 = grid::make_strip(g2, 20);
  grid::GridFn eta2{g2, VectorXd(-0.05 * (g2.nodes.array() / 2).cosh().pow(-2))};
  auto r2 = dno::dno_matrix(eta2, 0.7, strip2);
  MatrixXd direct = dno::dno_matrix_direct(eta2, 0.7, strip2);
  MatrixXd dsym = 0.5 * (direct + direct.transpose());
  std::printf("matrix vs direct: rel %.3e, asym %.3e, iters %d\n",
              (r2.matrix - dsym).norm() / dsym.norm(), r2.asymmetry, r2.iterations);

  // reference-size timing
  auto gg = grid::make_grid(122.474, 512);
  auto ss = grid::make_strip(gg, 48);
  VectorXd etab =
      -0.01 * (0.1 * gg.nodes.array() / (2 * std::sqrt(1.0 / 6))).cosh().pow(-2);
  dno::DnoSolver solver(ss);
  auto t0 = clock_t_::now();
  auto m1 = solver.matrix(etab, 0.5);
  auto t1 = clock_t_::now();
  std::printf("512x48 cold build: %.2fs, iters %d, asym %.3e\n", secs(t0, t1),
              m1.iterations, m1.asymmetry);
  auto t2 = clock_t_::now();
  auto m2 = solver.matrix(etab, 0.55);
  auto t3 = clock_t_::now();
  std::printf("512x48 warm build (k shift): %.2fs, iters %d\n", secs(t2, t3),
              m2.iterations);
  auto t4 = clock_t_::now();
  VectorXd u = (gg.nodes.array() * (M_PI / 122.474)).sin();
  solver.apply(etab, 0.5, u);
  auto t5 = clock_t_::now();
  std::printf("512x48 single apply: %.3fs\n", secs(t4, t5));
  return 0;
}
