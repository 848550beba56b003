#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "msgfem/local_problems.hpp"

namespace msgfem {

/// Malformed configuration; carries the offending line (1-based, 0 when not tied to a line) and key.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(int line, std::string key, const std::string& message);
  int line() const { return line_; }
  const std::string& key() const { return key_; }

private:
  int line_;
  std::string key_;
};

struct SourceSpec {
  enum class Kind { constant, sine };
  Kind kind = Kind::constant;
  double value = 1.0; ///< constant value, or amplitude of sin(pi x) sin(pi y)
};

/**
 * @brief Everything a run needs.
 *
 * Text form is one `key = value` per line with `#` comments. Keys and
 * defaults:
 *
 *     mesh_n = 64              grid_m = 4
 *     overlap = 2              oversampling = 4
 *     gamma0_sq = 10
 *     coefficient = constant   # constant | checkerboard | channels | log_uniform
 *     coefficient_value = 1    contrast = 1     block = 4     channels = 1
 *     nu_min = 1               nu_max = 1
 *     seed = 1                 # coefficient draws and random checks
 *     source = constant        # constant | sine
 *     source_value = 1
 *     coarse_rule = fixed      # fixed | threshold
 *     coarse_n = 4             coarse_tau = 0
 *     sweep_nj =               # comma-separated n_j list; overrides coarse_rule
 *     fit_modes = 20           # finite modes in the eigenvalue decay fit
 *     eigen_export = 40        # eigenvalues written per subdomain
 *     checks = true            samples = 100
 *     out_dir = out
 */
struct RunConfig {
  int mesh_n = 64;
  int grid_m = 4;
  int overlap = 2;
  int oversampling = 4;
  double gamma0_sq = 10.0;
  CoefficientSpec coefficient{.block = 4};
  std::uint64_t seed = 1;
  SourceSpec source;
  CoarseRule coarse_rule;
  std::vector<int> sweep_nj;
  int fit_modes = 20;
  int eigen_export = 40;
  bool checks = true;
  int samples = 100;
  std::string out_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&);
};

RunConfig parse_config(const std::string& text);
std::string serialize(const RunConfig& config);

/// Cross-field checks (block divides mesh_n, grid_m <= mesh_n, ...). parse_config calls it.
void validate(const RunConfig& config);

} // namespace msgfem
