#pragma once

#include <span>
#include <vector>

#include "msgfem/local_problems.hpp"

namespace msgfem {

/// Global coarse space: blended local eigenfunctions in fine dof coordinates.
struct CoarseSpace {
  Matrix basis;       ///< kept columns E(I_h(chi_j phi_k^j))
  Matrix orthonormal; ///< H(Omega)-orthonormal basis of the same span
  std::vector<int> owner;          ///< subdomain of each kept column
  std::vector<int> mode;           ///< local mode index of each kept column
  std::vector<int> offsets;        ///< offsets[j]: first kept column of subdomain j; offsets.back() = total
  int dropped = 0;                 ///< columns removed as linearly dependent

  int size() const { return static_cast<int>(basis.cols()); }
};

struct CoarseAssembly {
  CoarseSpace coarse;
  Vector particular; ///< u^p = sum_j E(I_h(chi_j u^p_j))
};

/// Builds u^p and the coarse space from n_j modes per subdomain. Columns whose
/// H-orthogonal remainder is below 1e-10 of their H-norm are dropped.
CoarseAssembly assemble_coarse(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq,
                               const Decomposition& dec, const PartitionOfUnity& pou,
                               std::span<const LocalSpectralData> locals, std::span<const int> counts);

/// Galerkin correction u^s in span(coarse): C^T B C y = C^T (F - B u^p), u^s = C y.
struct CoarseSolve {
  Vector correction;
  double reduced_asymmetry = 0.0; ///< max |R - R^T| / max |R| of the reduced matrix as formed
  double residual = 0.0;          ///< relative residual of the reduced system
};

CoarseSolve solve_coarse(const SparseMatrix& B, const Vector& F, const CoarseSpace& coarse, const Vector& u_p);

struct MsgfemSolution {
  Vector u_p;
  Vector u_s;
  Vector u_g;
};

struct ErrorReport {
  double energy_error = 0.0;
  double l2_error = 0.0;
  double rel_energy_error = 0.0;
  double rel_l2_error = 0.0;
  double max_sqrt_lambda_next = 0.0; ///< max_j sqrt(lambda_{n_j+1})
};

/// Errors of u_G against u_fine in the Omega-level B+ and L2 norms.
ErrorReport error_report(const SparseMatrix& Bplus, const SparseMatrix& mass, const Vector& u_g,
                         const Vector& u_fine);

/// max_j sqrt(lambda^j_{n_j+1}); a subdomain with every mode selected contributes 0.
double max_sqrt_lambda_next(std::span<const LocalSpectralData> locals, std::span<const int> counts);

} // namespace msgfem
