#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wavespec/common.hpp"

namespace wavespec::io {

using Eigen::MatrixXd;

struct RunConfig {
  double epsilon = 0.1;
  double beta = 0.5;

  double lx = 0.0;  // 0 = auto from the solitary-wave decay
  int nx = 512;
  int nz = 48;

  double k_min = 0.0;
  double k_max = 3.0;
  int nk = 61;

  double newton_tol = 1e-11;
  double re_tol = 1e-6;   // unstable-classification factor
  double sym_tol = 1e-6;  // DN asymmetry guard

  std::string out_dir = "out";
  std::string cache_dir = "cache";
  int threads = 1;

  int packet_nk = 33;
  bool one_sided_interval = false;
  bool packet_auto_refine = false;
  std::string propagator = "eigen";  // "eigen" | "midpoint"

  void validate() const;
  double resolved_lx() const;
  /// Cache directory after the WAVESPEC_CACHE override.
  std::string resolved_cache_dir() const;
  uint64_t digest() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_text(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

/// 17 significant digits, scientific, locale-independent.
std::string format_double(double v);

/// CSV with '#' metadata lines, a header row, and fixed float formatting so
/// byte-identical reruns are possible.
struct CsvTable {
  std::vector<std::string> meta;     // without the leading '#'
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  std::string to_string() const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

uint64_t fnv1a_bytes(const void* data, size_t n,
                     uint64_t seed = 1469598103934665603ull);

/// Content-addressed matrix store. Entries are keyed by the caller-provided
/// hash; corrupted files are detected by a payload checksum and rebuilt.
class CacheStore {
 public:
  explicit CacheStore(std::string dir);  // empty dir disables the store

  bool enabled() const { return !dir_.empty(); }
  std::optional<MatrixXd> get(uint64_t key);
  void put(uint64_t key, const MatrixXd& m);
  MatrixXd get_or_build(uint64_t key, const std::function<MatrixXd()>& builder);

  struct Stats {
    int hits = 0;
    int misses = 0;
    int corrupted = 0;
  };
  const Stats& stats() const { return stats_; }

 private:
  std::string path_for(uint64_t key) const;
  std::string dir_;
  Stats stats_;
};

/// Key for a DN realization: operator kind, surface digest, wavenumber, grid
/// dimensions and code version.
uint64_t dno_cache_key(const Eigen::VectorXd& eta, double k, int nx, int nz,
                       double lx);

}  // namespace wavespec::io
