#pragma once

#include <span>
#include <vector>

#include "msgfem/decomposition.hpp"
#include "msgfem/dg_forms.hpp"
#include "msgfem/space_ops.hpp"

namespace msgfem {

/// Rows/columns of A selected by index lists.
SparseMatrix submatrix(const SparseMatrix& A, std::span<const int> rows, std::span<const int> cols);

/**
 * @brief Basis of the discretely harmonic space H_B(omega*).
 *
 * Column k takes the unit value on layer dof k (a dof of an element outside
 * (omega*)^-), zero on the other layer dofs, and the discrete harmonic
 * extension on the H0 dofs.
 */
struct HarmonicBasis {
  Matrix basis;                  ///< omega*-local dofs x layer dofs
  std::vector<int> layer_dofs;   ///< omega*-local dofs outside H0(omega*)
  std::vector<int> interior_dofs; ///< omega*-local dofs of H0(omega*)
};

HarmonicBasis harmonic_basis(const TriMesh& mesh, const Coefficient& nu, const ElementSet& omega_star,
                             double gamma0_sq);

/// max over columns v and H0 test dofs i of |(B v)_i| / ||v||_H.
double harmonic_residual(const TriMesh& mesh, const Coefficient& nu, const ElementSet& omega_star,
                         double gamma0_sq, const Matrix& basis);

/// psi in H0(omega*) with B_{omega*}(psi, v) = F_{omega*}(v) for all v in H0(omega*), on omega* dofs.
Vector local_source_solution(const TriMesh& mesh, const Coefficient& nu, const Source& f,
                             const ElementSet& omega_star, double gamma0_sq);

/// u^p = psi|_omega.
Vector particular_solution(const TriMesh& mesh, const Coefficient& nu, const Source& f, const ElementSet& omega,
                           const ElementSet& omega_star, double gamma0_sq);

/**
 * @brief Eigenpairs of B+_omega(P phi, P v) = lambda B+_{omega*}(phi, v) on H_B(omega*).
 *
 * Eigenvalues are sorted descending. The kernel of the right-hand form (the
 * constants, when omega* has no outer boundary face) is reported first with
 * lambda = +inf. Finite pairs are computed on the complement of that kernel,
 * after eliminating the kernel component against the left-hand form, so they
 * are genuine eigenpairs of the full pencil.
 */
struct Eigenpairs {
  Vector values;       ///< descending, kernel entries are +inf
  Matrix vectors;      ///< coefficient vectors w.r.t. the harmonic basis, one per column
  int kernel_dim = 0;
  double max_residual = 0.0; ///< max ||A x - lambda M x|| / (||A|| ||x||) over finite pairs
  double min_mass_eigenvalue = 0.0; ///< smallest eigenvalue of M, for PSD diagnostics
};

/// Matrices A = (P Phi)^T B+_omega (P Phi) and M = Phi^T B+_{omega*} Phi.
struct EigenPencil {
  Matrix A;
  Matrix M;
};

EigenPencil eigen_pencil(const TriMesh& mesh, const Coefficient& nu, std::span<const double> chi,
                         const ElementSet& omega, const ElementSet& omega_star, double gamma0_sq,
                         const HarmonicBasis& hb);

Eigenpairs eigenproblem(const TriMesh& mesh, const Coefficient& nu, std::span<const double> chi,
                        const ElementSet& omega, const ElementSet& omega_star, double gamma0_sq,
                        const HarmonicBasis& hb);

/// Solve a prepared pencil; `kernel_candidate` is the coefficient vector of the
/// constant function when omega* is interior, empty otherwise.
Eigenpairs solve_pencil(const EigenPencil& pencil, const Vector& kernel_candidate);

struct CoarseRule {
  enum class Kind { fixed, threshold };
  Kind kind = Kind::fixed;
  int count = 4;    ///< fixed: modes per subdomain, kernel modes included
  double tau = 0.0; ///< threshold on sqrt(lambda)
};

/// Number of modes chosen by the rule. Kernel modes are always taken.
int select_count(const Eigenpairs& eig, const CoarseRule& rule);

/// Columns phi_k|_omega (omega-local dofs) of the first n modes.
Matrix select_coarse(const TriMesh& mesh, const ElementSet& omega, const ElementSet& omega_star,
                     const HarmonicBasis& hb, const Eigenpairs& eig, int n);

/// Everything computed on one oversampling domain.
struct LocalSpectralData {
  int index = 0;
  Vector particular;  ///< u^p_j on omega_j dofs
  HarmonicBasis harmonic;
  Eigenpairs eig;
  bool interior = false;
};

LocalSpectralData solve_local(const TriMesh& mesh, const Coefficient& nu, const Source& f,
                              const PartitionOfUnity& pou, const Decomposition& dec, int j, double gamma0_sq);

} // namespace msgfem
