#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "msgfem/config.hpp"
#include "msgfem/msgfem_global.hpp"
#include "msgfem/verification.hpp"

namespace msgfem {

Source make_source(const SourceSpec& spec);

/// Everything that does not depend on the number of selected modes.
struct Pipeline {
  TriMesh mesh;
  Coefficient nu;
  Decomposition dec;
  PartitionOfUnity pou;
  std::vector<LocalSpectralData> locals;
  SparseMatrix B;
  SparseMatrix Bplus;
  SparseMatrix mass;
  Vector F;
  Vector u_fine;

  /// Builds mesh, coefficient, decomposition and PoU, solves the local problems
  /// (on `threads` workers) and the fine reference problem.
  Pipeline(const RunConfig& config, int threads);
};

/// One line of errors.csv.
struct SweepRow {
  int grid_m = 0;
  int overlap = 0;
  int oversampling = 0;
  int n_j = 0; ///< requested modes per subdomain (largest selected count under the threshold rule)
  double gamma0_sq = 0.0;
  double contrast = 0.0;
  int n_total = 0;
  double rel_bplus_error = 0.0;
  double rel_l2_error = 0.0;
  double max_sqrt_lambda_next = 0.0;
  double fit_slope = 0.0; ///< eigenvalue decay fit of the subdomain with the smallest R^2
  double fit_r2 = 0.0;
};

/// Worst per-subdomain fit of log sqrt(lambda_k) against k^{1/2} over finite modes 1..modes.
/// Empty when some subdomain has fewer than 5 positive finite modes.
std::optional<DecayFit> worst_eigen_fit(const Pipeline& p, int modes);

/// Modes per subdomain for a uniform request n_j: at least the kernel, at most what is available.
std::vector<int> uniform_counts(const Pipeline& p, int n_j);
std::vector<int> rule_counts(const Pipeline& p, const CoarseRule& rule);

struct SweepPoint {
  SweepRow row;
  MsgfemSolution solution;
  CoarseSolve diagnostics;
  ErrorReport errors;
};

SweepPoint evaluate(const Pipeline& p, const RunConfig& config, std::span<const int> counts, int n_j);

struct ExperimentResult {
  std::optional<PropertyReport> report;
  std::vector<SweepRow> rows;
  std::optional<DecayFit> sweep_fit;  ///< log rel B+ error against n_j^{1/2}, when the sweep has >= 5 points
  double max_error_ratio = 0.0;       ///< max over rows of relBplusErr / maxSqrtLambdaNext
  std::string failure;                ///< pipeline failure, empty on success
  int exit_code = 0;
};

void write_eigenvalues_csv(std::ostream& os, const Pipeline& p, int per_subdomain);
void write_errors_csv(std::ostream& os, std::span<const SweepRow> rows);

struct RunOptions {
  int threads = 1;
  bool checks_only = false;
};

/**
 * @brief Full run: property suite, local problems, sweep.
 *
 * Writes checks.json, eigenvalues.csv and errors.csv to config.out_dir, each
 * as soon as it is complete, and logs progress to `log`. exit_code is 0 when
 * every enabled check passes and the pipeline completes, 1 otherwise.
 */
ExperimentResult run(const RunConfig& config, const RunOptions& options, std::ostream& log);

} // namespace msgfem
