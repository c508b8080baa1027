#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace wavespec {

/// Invalid configuration or parameters outside the supported regime.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A solver failed to converge or produced an unusable result.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Physical and asymptotic parameters. alpha = 1 + epsilon^2 throughout.
struct Params {
  double epsilon = 0.1;
  double beta = 0.5;

  double alpha() const { return 1.0 + epsilon * epsilon; }

  /// sqrt(beta - 1/3); the KdV length scale of the solitary wave.
  double kdv_scale() const;

  void validate() const;
};

inline double Params::kdv_scale() const {
  return std::sqrt(beta - 1.0 / 3.0);
}

inline void Params::validate() const {
  if (!(beta > 1.0 / 3.0)) throw ConfigError("beta must exceed 1/3");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (epsilon > 0.3)
    throw ConfigError("epsilon exceeds the supported amplitude cap 0.3");
}

}  // namespace wavespec
