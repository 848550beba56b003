#pragma once

#include <span>
#include <utility>
#include <vector>

#include "msgfem/decomposition.hpp"
#include "msgfem/dg_forms.hpp"

namespace msgfem {

/// D-local dofs of H0(D): the dofs of elements in D^-.
struct SubspaceMask {
  std::vector<int> dofs;    ///< selected D-local dofs, ascending
  std::vector<char> active; ///< active[i] != 0 iff D-local dof i is selected
};

SubspaceMask h0_mask(const TriMesh& mesh, const ElementSet& D);

/// R: D*-local vector -> D-local vector (plain restriction). Requires D subset of D*.
Vector restrict_vector(const TriMesh& mesh, const Vector& u, const ElementSet& Dstar, const ElementSet& D);

/// E: H0(D) -> H0(D*), copies the D^- dofs and zero elsewhere.
/// Rejects v with a nonzero dof outside D^-.
Vector extend_by_zero(const TriMesh& mesh, const Vector& v, const ElementSet& D, const ElementSet& Dstar);

/// Continuous piecewise-linear partition of unity, stored by vertex values.
struct PartitionOfUnity {
  std::vector<Vector> chi;         ///< chi[j][v]
  std::vector<double> gradient_sup; ///< max |grad chi_j| over the mesh

  int size() const { return static_cast<int>(chi.size()); }
};

/**
 * @brief Partition of unity subordinate to the overlapping decomposition.
 *
 * For subdomain j let V_j be the vertices whose incident elements all lie in
 * omega_j^-. The raw weight is 1 on the vertices of the grid cell, 0 off V_j
 * and, in between, d0 / (d0 + d1) with d0 the hop distance to the complement
 * of V_j and d1 the hop distance to the cell. Weights are then normalised to
 * sum to one. Throws if a vertex has no positive weight.
 */
PartitionOfUnity build_pou(const TriMesh& mesh, const Decomposition& dec);

/// max over elements of D of |grad chi| for a continuous piecewise-linear chi.
double gradient_sup(const TriMesh& mesh, std::span<const double> chi, const ElementSet& D);

/// I_h(chi u): nodal values chi(vertex) * u|_T(vertex) per element of omega.
Vector interpolate_product(const TriMesh& mesh, std::span<const double> chi, const ElementSet& omega,
                           const Vector& u);

/// sum_j E_{omega_j, Omega}(I_h(chi_j phi_j)) in global dof numbering.
Vector pou_blend(const TriMesh& mesh, const Decomposition& dec, const PartitionOfUnity& pou,
                 std::span<const Vector> locals);

/// (B_D(u|_D, v), B_{D*}(u, E(v))) for u on D* and v in H0(D).
std::pair<double, double> locality_check(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq,
                                         const Vector& u, const Vector& v, const ElementSet& D,
                                         const ElementSet& Dstar);

} // namespace msgfem
