#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "msgfem/decomposition.hpp"
#include "msgfem/mesh.hpp"

namespace msgfem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Source = std::function<double(const Point&)>;

/*
 * Discrete space: piecewise-linear, discontinuous. Element e owns the three
 * nodal dofs 3e, 3e+1, 3e+2 attached to its vertices in element order. On a
 * subdomain D the same layout is used with e replaced by the rank of e in D.
 *
 * Face conventions for a mesh-resolved D:
 *  - an interior face belongs to D iff both adjacent elements are in D,
 *  - a boundary face of the mesh belongs to D iff its element is in D,
 *  - faces on the interior boundary of D carry no terms at all.
 * Jumps are [[u]] = u_a - u_b with a the smaller element index, oriented by
 * the outward normal of a; on boundary faces [[u]] = u.
 */

inline int dof(int element, int slot) { return 3 * element + slot; }

/// Weighted penalty coefficient gamma0^2 / h_F * 2 nu1 nu2 / (nu1 + nu2).
/// The stabilisation parameter enters only squared, so it is passed squared.
double gamma_sq(double nu1, double nu2, double h_f, double gamma0_sq);

/// Weights (w1, w2) = (2 nu2, 2 nu1) / (nu1 + nu2) of the weighted sum {u}_w = w1 u1 + w2 u2.
std::pair<double, double> weighted_avg_weights(double nu1, double nu2);

/// Which pieces of the interior-penalty forms to assemble.
struct FormTerms {
  bool stiffness = false;            ///< (nu grad u, grad v)
  bool interior_penalty = false;     ///< <gamma^2 [[u]], [[v]]> on interior faces
  bool interior_consistency = false; ///< -B_c^i(u,v) - B_c^i(v,u)
  double boundary_penalty = 0.0;     ///< factor on <gamma^2 u, v> over boundary faces
  bool boundary_consistency = false; ///< -B_c^d(u,v) - B_c^d(v,u)
  bool mass = false;                 ///< (u, v)

  static FormTerms bilinear();  ///< B: all terms, boundary penalty factor 2
  static FormTerms energy();    ///< B+: stiffness and jump penalties, factor 1
  static FormTerms hilbert();   ///< H: B+ plus mass
  static FormTerms penalty();   ///< penalty part of B
  static FormTerms consistency(); ///< consistency part of B
  static FormTerms mass_only();
};

enum class FormKind { bilinear, energy, hilbert, penalty, consistency, mass, custom };

struct FormMatrix {
  SparseMatrix matrix;
  FormKind kind = FormKind::custom;
};

/// Per-element volume contribution (3x3) in element-local slots.
Eigen::Matrix3d element_matrix(const TriMesh& mesh, const Coefficient& nu, int e, const FormTerms& terms);

/// Face contribution. For interior faces the 6 rows are the slots of element_a
/// followed by element_b; boundary faces give 3x3.
struct FaceMatrix {
  std::vector<int> elements;
  Matrix values;
};
FaceMatrix face_matrix(const TriMesh& mesh, const Coefficient& nu, FaceRef face, double gamma0_sq,
                       const FormTerms& terms);

/// Assemble the selected terms over D in D-local dof numbering.
FormMatrix assemble_form(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq,
                         const FormTerms& terms, FormKind kind = FormKind::custom);

FormMatrix assemble_B(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq);
FormMatrix assemble_Bplus(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq);
FormMatrix assemble_H(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq);
FormMatrix assemble_mass(const TriMesh& mesh, const ElementSet& D);

/// F_D(v) = int_D f v, integrated with a degree-5 rule.
Vector assemble_load(const TriMesh& mesh, const Source& f, const ElementSet& D);

/// sqrt(u^T A u). Throws NumericalError if the form is clearly negative.
double form_norm(const SparseMatrix& A, const Vector& u);

enum class NormKind { energy, hilbert, l2 };

/// Norm of a D-local vector; assembles the needed matrix.
double energy_norm(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq,
                   const Vector& u, NormKind which);

} // namespace msgfem
