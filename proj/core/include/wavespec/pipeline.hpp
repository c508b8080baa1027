#pragma once

#include <optional>
#include <ostream>

#include "wavespec/evolution.hpp"
#include "wavespec/io.hpp"

namespace wavespec::pipeline {

struct StageTimings {
  double solitary = 0.0;
  double dno = 0.0;     // time inside DN realization builds/loads
  double sweep = 0.0;   // k sweep including eigensolves
  double packet = 0.0;
  double total = 0.0;
  int dno_builds = 0;
  int dno_cache_hits = 0;
};

struct CheckEntry {
  std::string name;
  bool passed = false;
  double value = 0.0;
};

/// Everything the pipeline computed, kept in memory for downstream checks.
struct Artifacts {
  io::RunConfig cfg;
  solitary::SolitaryWave wave;
  std::vector<spectra::GrowthEvaluator::Sample> sweep;
  spectra::GrowthCurve curve;
  spectra::FCurve fcurve;
  std::optional<evolution::WavePacket> packet;
  evolution::GrowthFit fit{};
  bool fit_valid = false;
  Eigen::VectorXd a_eps_low;  // lowest eigenvalues of A_eps
  double a_eps_zero_corr = 0.0;
  StageTimings timings;
  std::vector<CheckEntry> checks;
};

/// Shared DN realization provider: one solver, disk cache, stage timing.
class GContext {
 public:
  GContext(const grid::StripGrid& strip, const std::string& cache_dir,
           StageTimings* timings = nullptr);
  Eigen::MatrixXd get(const Eigen::VectorXd& eta, double k);
  dno::DnoSolver& solver() { return solver_; }
  io::CacheStore& cache() { return cache_; }
  double max_asymmetry() const { return max_asym_; }

 private:
  grid::StripGrid strip_;
  dno::DnoSolver solver_;
  io::CacheStore cache_;
  StageTimings* timings_;
  double max_asym_ = 0.0;
};

/// Solve the wave, sweep the growth curve, build the packet, write every
/// artifact (CSV/JSON) into cfg.out_dir. Deterministic byte-for-byte for a
/// fixed config; timings go to a separate non-deterministic file.
Artifacts run_pipeline(const io::RunConfig& cfg, std::ostream* log = nullptr);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
};

struct AcceptanceReport {
  std::vector<CriterionResult> criteria;
  bool all_passed = true;
};

/// The acceptance suite: every criterion at its pinned tolerance, one
/// pass/fail line per criterion on `log`.
AcceptanceReport run_acceptance(const io::RunConfig& cfg, std::ostream& log);

}  // namespace wavespec::pipeline
