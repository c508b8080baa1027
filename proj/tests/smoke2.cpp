// Scratch driver: solitary-wave Newton bring-up.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "wavespec/solitary.hpp"

using namespace wavespec;
using Eigen::VectorXd;
using sclock = std::chrono::steady_clock;

int main() {
  Params p{0.1, 0.5};
  const int nx = 256, nz = 32;
  auto g = grid::make_grid(solitary::default_half_length(p), nx);
  auto strip = grid::make_strip(g, nz);

  auto t0 = sclock::now();
  auto lead = solitary::leading_profile(p, strip);
  std::printf("leading: eta(0 node)=%.6f residual=%.3e ramp=%.6e\n",
              lead.eta.minCoeff(), lead.residual_norm, lead.ramp);

  auto t1 = sclock::now();
  auto w = solitary::newton_refine(lead);
  auto t2 = sclock::now();
  std::printf("newton: iters=%d residual=%.3e  (%.1fs lead, %.1fs newton)\n",
              w.newton_iterations, w.residual_norm,
              std::chrono::duration<double>(t1 - t0).count(),
              std::chrono::duration<double>(t2 - t1).count());
  std::printf("history:");
  for (double r : w.residual_history) std::printf(" %.2e", r);
  std::printf("\n");

  auto rep = solitary::verify_identities(w);
  std::printf("identities: flux %.3e gamma %.3e Z %.3e gamma_min %.6f\n",
              rep.flux_identity, rep.gamma_identity, rep.z_identity, rep.gamma_min);
  std::printf("deviation from leading: %.3e (eps^4 = %.1e)\n",
              (w.eta - lead.eta).cwiseAbs().maxCoeff(), std::pow(p.epsilon, 4));

  // residual scaling in eps: expect ~16x between eps=0.2 and 0.1
  Params p2{0.2, 0.5};
  auto g2 = grid::make_grid(solitary::default_half_length(p2), nx);
  auto s2 = grid::make_strip(g2, nz);
  auto lead2 = solitary::leading_profile(p2, s2);
  std::printf("residual ratio eps 0.2/0.1: %.2f\n",
              lead2.residual_norm / lead.residual_norm);
  return 0;
}
