#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msgfem/local_problems.hpp"

namespace msgfem {

/// Global DG solution u^e of B(u, v) = F(v) for all v; the reference for every MS-GFEM error.
Vector fine_solve(const TriMesh& mesh, const Coefficient& nu, const Source& f, double gamma0_sq);

/// True when the global form B is positive definite (all LDL^T pivots positive).
bool is_coercive(const SparseMatrix& B);

/// Extreme generalized eigenvalues of B against B+ on the whole mesh (dense; small meshes only).
struct CoercivityInterval {
  double alpha = 0.0;
  double continuity = 0.0;
};
CoercivityInterval coercivity_interval(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq);

struct ConvergenceRecord {
  std::vector<double> h;
  std::vector<double> l2_error;
  std::vector<double> energy_error;
  std::vector<double> l2_rate;     ///< between consecutive levels
  std::vector<double> energy_rate;
};

/// Observed rate log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
double observed_rate(double e_coarse, double e_fine, double h_coarse, double h_fine);

/// nu = 1, f = 2 pi^2 sin(pi x) sin(pi y) against u = sin(pi x) sin(pi y) on the given meshes.
ConvergenceRecord manufactured_convergence(std::span<const int> levels, double gamma0_sq);

/// Penalty part of the B+ norm of a DG function (interior jumps and boundary traces).
double jump_seminorm(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq, const Vector& u);

/// Elementwise L2 projection of f onto discontinuous P1.
Vector elementwise_l2_projection(const TriMesh& mesh, const Source& f);

/// Least-squares line through (n^exponent, log value_n), n = 1, 2, ...
struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
DecayFit decay_fit(std::span<const double> values, double exponent);

/// Ordinary least-squares line y = intercept + slope x; R^2 = 1 when y is constant.
DecayFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Distance from omega to the part of the boundary of omega* inside the domain.
double boundary_distance(const TriMesh& mesh, const ElementSet& omega, const ElementSet& omega_star);

/// Largest diameter of the elements of omega* \ omega.
double annulus_max_diameter(const TriMesh& mesh, const ElementSet& omega, const ElementSet& omega_star);

struct CaccioppoliResult {
  double max_ratio = 0.0;
  double delta = 0.0;
  double h_max = 0.0;
  int samples = 0;
  bool mesh_condition = false; ///< delta > 3 h_max
};

/// ||u|_omega||_{B+,omega} delta / (nu_max^{1/2} ||u||_{L2(omega* \ omega)}) maximised over
/// random harmonic u built from uniform [-1, 1] layer data.
CaccioppoliResult caccioppoli_ratio(const TriMesh& mesh, const Coefficient& nu, const ElementSet& omega,
                                    const ElementSet& omega_star, double gamma0_sq, int samples,
                                    std::uint64_t seed);

/// Max over random u of ||I_h(chi u)||_H / (sqrt(1 + ||grad chi||_inf^2) ||u||_H) on omega.
double interpolation_stability(const TriMesh& mesh, const Coefficient& nu, std::span<const double> chi,
                               const ElementSet& omega, double gamma0_sq, int samples, std::uint64_t seed);

struct SuiteConfig {
  int mesh_n = 16;
  int grid_m = 2;
  int overlap = 2;
  int oversampling = 4;
  double gamma0_sq = 10.0;
  CoefficientSpec coefficient;
  std::uint64_t seed = 1;
  int samples = 100;
};

struct CheckResult {
  std::string name;
  std::string module;
  bool passed = false;
  std::string witness;
};

struct PropertyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  /// First failing check, or nullptr.
  const CheckResult* first_failure() const;
  std::string to_text() const;
  std::string to_json() const;
};

/**
 * @brief Runs the structural checks on one configuration.
 *
 * Decomposition cover, PoU partition/support, global coercivity, kernel of B+,
 * extension isometry, restriction, locality, R o E identity, harmonicity,
 * eigenpencil PSD and residual, Caccioppoli ratio, interpolation stability.
 * A decomposition that violates its preconditions is reported as a failed
 * "decomposition" check and the remaining checks are skipped.
 */
PropertyReport run_property_suite(const SuiteConfig& config);

} // namespace msgfem
