#include <cmath>
#include <cstdio>

#include "wavespec/dno.hpp"
#include "wavespec/grid.hpp"

using namespace wavespec;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int main() {
  auto g = grid::make_grid(10.0, 48);
  auto strip = grid::make_strip(g, 20);
  VectorXd eta = -0.05 * (g.nodes.array() / 2).cosh().pow(-2);
  const double k = 0.7;
  VectorXd u = (g.nodes.array() * (M_PI / 10.0)).sin() +
               0.3 * (2 * g.nodes.array() * (M_PI / 10.0)).cos();

  dno::DnoOptions opt;
  opt.max_iter = 30;

  std::printf("--- same instance, two applies ---\n");
  {
    dno::DnoSolver s(strip, opt);
    dno::DnoDiagnostics d1, d2;
    VectorXd g1 = s.apply(eta, k, u, &d1);
    std::printf("call1: iters %d update %.3e\n", d1.iterations, d1.final_update);
    VectorXd g2 = s.apply(eta, k, u, &d2);
    std::printf("call2: iters %d update %.3e  diff %.3e\n", d2.iterations,
                d2.final_update, (g1 - g2).cwiseAbs().maxCoeff());
  }
  std::printf("--- fresh instances ---\n");
  {
    dno::DnoSolver s1(strip, opt);
    dno::DnoDiagnostics d1;
    VectorXd g1 = s1.apply(eta, k, u, &d1);
    std::printf("call1: iters %d update %.3e\n", d1.iterations, d1.final_update);
  }
  {
    dno::DnoSolver s2(strip, opt);
    dno::DnoDiagnostics d2;
    VectorXd g2 = s2.apply(eta, k, u, &d2);
    std::printf("call2: iters %d update %.3e\n", d2.iterations, d2.final_update);
  }
  return 0;
}
