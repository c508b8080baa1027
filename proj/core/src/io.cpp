#include "wavespec/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "wavespec/version.hpp"

namespace wavespec::io {

namespace fs = std::filesystem;

void RunConfig::validate() const {
  Params{epsilon, beta}.validate();
  if (lx < 0) throw ConfigError("grid.lx must be positive or auto");
  if (nx < 16 || nx % 2 != 0) throw ConfigError("grid.nx must be even and >= 16");
  if (nz < 8) throw ConfigError("grid.nz must be >= 8");
  if (k_min < 0) throw ConfigError("krange.k_min must be >= 0");
  if (k_max <= k_min) throw ConfigError("krange.k_max must exceed k_min");
  if (nk < 8) throw ConfigError("krange.nk must be >= 8");
  if (newton_tol <= 0 || re_tol <= 0 || sym_tol <= 0)
    throw ConfigError("tolerances must be positive");
  if (packet_nk != 1 && (packet_nk < 3 || packet_nk % 2 == 0))
    throw ConfigError("packet.nk must be 1 or an odd number >= 3");
  if (propagator != "eigen" && propagator != "midpoint")
    throw ConfigError("packet.propagator must be 'eigen' or 'midpoint'");
  if (threads < 0) throw ConfigError("output.threads must be >= 0");
}

double RunConfig::resolved_lx() const {
  if (lx > 0) return lx;
  return 30.0 * std::sqrt(beta - 1.0 / 3.0) / epsilon;
}

std::string RunConfig::resolved_cache_dir() const {
  if (const char* env = std::getenv("WAVESPEC_CACHE")) return env;
  return cache_dir;
}

uint64_t RunConfig::digest() const {
  std::string text = config_to_text(*this);
  return fnv1a_bytes(text.data(), text.size());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_state_double(const std::string& path, const std::string& v) {
  try {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + path + ": '" + v + "'");
  }
}

int parse_state_int(const std::string& path, const std::string& v) {
  try {
    size_t pos = 0;
    int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError("invalid integer for " + path + ": '" + v + "'");
  }
}

bool parse_state_bool(const std::string& path, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean for " + path + ": '" + v + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    std::string path = section.empty() ? key : section + "." + key;

    if (path == "epsilon") cfg.epsilon = parse_state_double(path, val);
    else if (path == "beta") cfg.beta = parse_state_double(path, val);
    else if (path == "grid.lx") cfg.lx = (val == "auto") ? 0.0 : parse_state_double(path, val);
    else if (path == "grid.nx") cfg.nx = parse_state_int(path, val);
    else if (path == "grid.nz") cfg.nz = parse_state_int(path, val);
    else if (path == "krange.k_min") cfg.k_min = parse_state_double(path, val);
    else if (path == "krange.k_max") cfg.k_max = parse_state_double(path, val);
    else if (path == "krange.nk") cfg.nk = parse_state_int(path, val);
    else if (path == "tolerances.newton_tol") cfg.newton_tol = parse_state_double(path, val);
    else if (path == "tolerances.re_tol") cfg.re_tol = parse_state_double(path, val);
    else if (path == "tolerances.sym_tol") cfg.sym_tol = parse_state_double(path, val);
    else if (path == "output.out_dir") cfg.out_dir = val;
    else if (path == "output.cache_dir") cfg.cache_dir = val;
    else if (path == "output.threads") cfg.threads = parse_state_int(path, val);
    else if (path == "packet.nk") cfg.packet_nk = parse_state_int(path, val);
    else if (path == "packet.one_sided") cfg.one_sided_interval = parse_state_bool(path, val);
    else if (path == "packet.auto_refine") cfg.packet_auto_refine = parse_state_bool(path, val);
    else if (path == "packet.propagator") cfg.propagator = val;
    else
      throw ConfigError("unknown config key: " + path);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  return parse_config_text(read_text_file(path));
}

std::string config_to_text(const RunConfig& cfg) {
  std::ostringstream os;
  os << "epsilon = " << format_double(cfg.epsilon) << "\n";
  os << "beta = " << format_double(cfg.beta) << "\n\n";
  os << "[grid]\n";
  if (cfg.lx > 0)
    os << "lx = " << format_double(cfg.lx) << "\n";
  else
    os << "lx = auto\n";
  os << "nx = " << cfg.nx << "\n";
  os << "nz = " << cfg.nz << "\n\n";
  os << "[krange]\n";
  os << "k_min = " << format_double(cfg.k_min) << "\n";
  os << "k_max = " << format_double(cfg.k_max) << "\n";
  os << "nk = " << cfg.nk << "\n\n";
  os << "[tolerances]\n";
  os << "newton_tol = " << format_double(cfg.newton_tol) << "\n";
  os << "re_tol = " << format_double(cfg.re_tol) << "\n";
  os << "sym_tol = " << format_double(cfg.sym_tol) << "\n\n";
  os << "[output]\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "cache_dir = " << cfg.cache_dir << "\n";
  os << "threads = " << cfg.threads << "\n\n";
  os << "[packet]\n";
  os << "nk = " << cfg.packet_nk << "\n";
  os << "one_sided = " << (cfg.one_sided_interval ? "true" : "false") << "\n";
  os << "auto_refine = " << (cfg.packet_auto_refine ? "true" : "false") << "\n";
  os << "propagator = " << cfg.propagator << "\n";
  return os.str();
}

void save_config(const RunConfig& cfg, const std::string& path) {
  write_text_file(path, config_to_text(cfg));
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_double(v));
  rows.push_back(std::move(row));
}

std::string CsvTable::to_string() const {
  std::ostringstream os;
  for (const auto& m : meta) os << "# " << m << "\n";
  for (size_t i = 0; i < columns.size(); ++i)
    os << columns[i] << (i + 1 < columns.size() ? "," : "");
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      os << row[i] << (i + 1 < row.size() ? "," : "");
    os << "\n";
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot write " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
  }
  fs::rename(tmp, path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

uint64_t fnv1a_bytes(const void* data, size_t n, uint64_t seed) {
  auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

namespace {
constexpr char kCacheMagic[8] = {'W', 'S', 'P', 'C', '0', '0', '0', '1'};
}

CacheStore::CacheStore(std::string dir) : dir_(std::move(dir)) {
  if (!dir_.empty()) fs::create_directories(dir_);
}

std::string CacheStore::path_for(uint64_t key) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64 ".bin", key);
  return dir_ + "/" + buf;
}

std::optional<MatrixXd> CacheStore::get(uint64_t key) {
  if (!enabled()) return std::nullopt;
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) {
    ++stats_.misses;
    return std::nullopt;
  }
  char magic[8];
  uint64_t fkey = 0, payload_hash = 0;
  int64_t rows = 0, cols = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&fkey), 8);
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&cols), 8);
  in.read(reinterpret_cast<char*>(&payload_hash), 8);
  bool ok = in.good() && std::memcmp(magic, kCacheMagic, 8) == 0 && fkey == key &&
            rows > 0 && cols > 0 && rows * cols < (1ll << 32);
  MatrixXd m;
  if (ok) {
    m.resize(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    ok = in.good() &&
         fnv1a_bytes(m.data(), sizeof(double) * rows * cols) == payload_hash;
  }
  if (!ok) {
    ++stats_.corrupted;
    ++stats_.misses;
    in.close();
    std::error_code ec;
    fs::remove(path_for(key), ec);
    return std::nullopt;
  }
  ++stats_.hits;
  return m;
}

void CacheStore::put(uint64_t key, const MatrixXd& m) {
  if (!enabled()) return;
  const std::string path = path_for(key);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cache write failed: " + tmp);
    int64_t rows = m.rows(), cols = m.cols();
    uint64_t payload_hash = fnv1a_bytes(m.data(), sizeof(double) * rows * cols);
    out.write(kCacheMagic, 8);
    out.write(reinterpret_cast<const char*>(&key), 8);
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    out.write(reinterpret_cast<const char*>(&payload_hash), 8);
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!out) throw NumericalError("cache write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

MatrixXd CacheStore::get_or_build(uint64_t key,
                                  const std::function<MatrixXd()>& builder) {
  if (auto hit = get(key)) return *hit;
  MatrixXd m = builder();
  put(key, m);
  return m;
}

uint64_t dno_cache_key(const Eigen::VectorXd& eta, double k, int nx, int nz,
                       double lx) {
  uint64_t h = fnv1a_bytes("dno", 3);
  h = fnv1a_bytes(eta.data(), sizeof(double) * eta.size(), h);
  h = fnv1a_bytes(&k, sizeof(k), h);
  h = fnv1a_bytes(&nx, sizeof(nx), h);
  h = fnv1a_bytes(&nz, sizeof(nz), h);
  h = fnv1a_bytes(&lx, sizeof(lx), h);
  h = fnv1a_bytes(code_version, std::strlen(code_version), h);
  return h;
}

}  // namespace wavespec::io
