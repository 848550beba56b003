#include "msgfem/dg_forms.hpp"

#include <array>
#include <cmath>

#include "msgfem/error.hpp"
#include "msgfem/quadrature.hpp"

namespace msgfem {

namespace {

/// One side of a face: the element, its slots' vertices and flux data.
struct FaceSide {
  int element;
  std::array<int, 3> vertex;
  std::array<bool, 3> on_face;
  std::array<double, 3> normal_flux; ///< nu * grad(phi_k) . n
};

FaceSide make_side(const TriMesh& mesh, const Coefficient& nu, int e, const std::array<int, 2>& fv,
                   const Point& n) {
  FaceSide s;
  s.element = e;
  s.vertex = mesh.element(e);
  const auto grads = barycentric_gradients(mesh, e);
  for (int k = 0; k < 3; ++k) {
    s.on_face[k] = s.vertex[k] == fv[0] || s.vertex[k] == fv[1];
    s.normal_flux[k] = nu[e] * grads[k].dot(n);
  }
  return s;
}

} // namespace

double gamma_sq(double nu1, double nu2, double h_f, double gamma0_sq) {
  if (!(nu1 > 0.0) || !(nu2 > 0.0) || !(h_f > 0.0) || !(gamma0_sq > 0.0))
    throw InvalidArgument("gamma_sq needs positive coefficients, face size and stabilisation");
  return gamma0_sq / h_f * (2.0 * nu1 * nu2 / (nu1 + nu2));
}

std::pair<double, double> weighted_avg_weights(double nu1, double nu2) {
  const double s = nu1 + nu2;
  return {2.0 * nu2 / s, 2.0 * nu1 / s};
}

FormTerms FormTerms::bilinear() {
  FormTerms t;
  t.stiffness = t.interior_penalty = t.interior_consistency = t.boundary_consistency = true;
  t.boundary_penalty = 2.0;
  return t;
}

FormTerms FormTerms::energy() {
  FormTerms t;
  t.stiffness = t.interior_penalty = true;
  t.boundary_penalty = 1.0;
  return t;
}

FormTerms FormTerms::hilbert() {
  FormTerms t = energy();
  t.mass = true;
  return t;
}

FormTerms FormTerms::penalty() {
  FormTerms t;
  t.interior_penalty = true;
  t.boundary_penalty = 2.0;
  return t;
}

FormTerms FormTerms::consistency() {
  FormTerms t;
  t.interior_consistency = t.boundary_consistency = true;
  return t;
}

FormTerms FormTerms::mass_only() {
  FormTerms t;
  t.mass = true;
  return t;
}

Eigen::Matrix3d element_matrix(const TriMesh& mesh, const Coefficient& nu, int e, const FormTerms& terms) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  const double area = mesh.area(e);
  if (terms.stiffness) {
    const auto g = barycentric_gradients(mesh, e);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        m(i, j) += nu[e] * area * g[i].dot(g[j]);
  }
  if (terms.mass)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        m(i, j) += area / 12.0 * (i == j ? 2.0 : 1.0);
  return m;
}

FaceMatrix face_matrix(const TriMesh& mesh, const Coefficient& nu, FaceRef face, double gamma0_sq,
                       const FormTerms& terms) {
  const FaceData fd = face_data(mesh, nu, face);
  const double len = fd.h_f;
  const double g2 = gamma_sq(fd.nu1, fd.nu2, fd.h_f, gamma0_sq);

  std::vector<FaceSide> sides;
  std::vector<double> sign;
  std::vector<double> flux_weight;
  FaceMatrix out;
  bool interior = face.kind == FaceRef::Kind::interior;
  if (interior) {
    const auto& f = mesh.interior_faces()[face.index];
    sides.push_back(make_side(mesh, nu, f.element_a, f.vertices, fd.normal));
    sides.push_back(make_side(mesh, nu, f.element_b, f.vertices, fd.normal));
    sign = {1.0, -1.0};
    // Half of the weighted sum: {nu grad u}_w / 2.
    const auto [w1, w2] = weighted_avg_weights(fd.nu1, fd.nu2);
    flux_weight = {0.5 * w1, 0.5 * w2};
    out.elements = {f.element_a, f.element_b};
  } else {
    const auto& f = mesh.boundary_faces()[face.index];
    sides.push_back(make_side(mesh, nu, f.element, f.vertices, fd.normal));
    sign = {1.0};
    flux_weight = {1.0};
    out.elements = {f.element};
  }

  const int nd = 3 * static_cast<int>(sides.size());
  auto side_of = [](int I) { return I / 3; };
  auto slot_of = [](int I) { return I % 3; };

  // Face mass of traces and the consistency coupling K(I,J) = c(phi_J, phi_I).
  Matrix trace_mass = Matrix::Zero(nd, nd);
  Matrix K = Matrix::Zero(nd, nd);
  for (int I = 0; I < nd; ++I) {
    const FaceSide& si = sides[side_of(I)];
    if (!si.on_face[slot_of(I)])
      continue;
    for (int J = 0; J < nd; ++J) {
      const FaceSide& sj = sides[side_of(J)];
      if (sj.on_face[slot_of(J)]) {
        const bool same = si.vertex[slot_of(I)] == sj.vertex[slot_of(J)];
        trace_mass(I, J) = sign[side_of(I)] * sign[side_of(J)] * len / 6.0 * (same ? 2.0 : 1.0);
      }
      K(I, J) = flux_weight[side_of(J)] * sj.normal_flux[slot_of(J)] * sign[side_of(I)] * (0.5 * len);
    }
  }

  const double penalty_factor = interior ? (terms.interior_penalty ? 1.0 : 0.0) : terms.boundary_penalty;
  const bool consistency = interior ? terms.interior_consistency : terms.boundary_consistency;
  out.values = Matrix::Zero(nd, nd);
  for (int I = 0; I < nd; ++I) {
    for (int J = 0; J < nd; ++J) {
      double v = 0.0;
      if (penalty_factor != 0.0)
        v += penalty_factor * g2 * trace_mass(I, J);
      if (consistency)
        v -= K(I, J) + K(J, I);
      out.values(I, J) = v;
    }
  }
  return out;
}

FormMatrix assemble_form(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq,
                         const FormTerms& terms, FormKind kind) {
  if (D.empty())
    throw InvalidArgument("cannot assemble a form on an empty subdomain");
  const auto pos = D.positions(mesh.num_elements());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(D.size()) * 9 * 4);

  if (terms.stiffness || terms.mass) {
    for (int e : D) {
      const Eigen::Matrix3d m = element_matrix(mesh, nu, e, terms);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          if (m(i, j) != 0.0)
            trip.emplace_back(dof(pos[e], i), dof(pos[e], j), m(i, j));
    }
  }

  auto scatter = [&](const FaceMatrix& fm) {
    const int nd = static_cast<int>(fm.values.rows());
    for (int I = 0; I < nd; ++I)
      for (int J = 0; J < nd; ++J)
        if (fm.values(I, J) != 0.0)
          trip.emplace_back(dof(pos[fm.elements[I / 3]], I % 3), dof(pos[fm.elements[J / 3]], J % 3), fm.values(I, J));
  };

  if (terms.interior_penalty || terms.interior_consistency) {
    const auto faces = mesh.interior_faces();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
      if (pos[faces[f].element_a] >= 0 && pos[faces[f].element_b] >= 0)
        scatter(face_matrix(mesh, nu, {FaceRef::Kind::interior, f}, gamma0_sq, terms));
  }
  if (terms.boundary_penalty != 0.0 || terms.boundary_consistency) {
    const auto faces = mesh.boundary_faces();
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
      if (pos[faces[f].element] >= 0)
        scatter(face_matrix(mesh, nu, {FaceRef::Kind::boundary, f}, gamma0_sq, terms));
  }

  FormMatrix out;
  out.kind = kind;
  out.matrix.resize(3 * D.size(), 3 * D.size());
  out.matrix.setFromTriplets(trip.begin(), trip.end());
  out.matrix.makeCompressed();
  return out;
}

FormMatrix assemble_B(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq) {
  return assemble_form(mesh, nu, D, gamma0_sq, FormTerms::bilinear(), FormKind::bilinear);
}

FormMatrix assemble_Bplus(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq) {
  return assemble_form(mesh, nu, D, gamma0_sq, FormTerms::energy(), FormKind::energy);
}

FormMatrix assemble_H(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq) {
  return assemble_form(mesh, nu, D, gamma0_sq, FormTerms::hilbert(), FormKind::hilbert);
}

FormMatrix assemble_mass(const TriMesh& mesh, const ElementSet& D) {
  const Coefficient unit(std::vector<double>(mesh.num_elements(), 1.0));
  return assemble_form(mesh, unit, D, 1.0, FormTerms::mass_only(), FormKind::mass);
}

Vector assemble_load(const TriMesh& mesh, const Source& f, const ElementSet& D) {
  Vector b = Vector::Zero(3 * D.size());
  int p = 0;
  for (int e : D) {
    const auto& el = mesh.element(e);
    const Point p0 = mesh.vertex(el[0]), p1 = mesh.vertex(el[1]), p2 = mesh.vertex(el[2]);
    for (const auto& q : dunavant5) {
      const Point x = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
      const double fx = f(x) * q.weight * mesh.area(e);
      for (int k = 0; k < 3; ++k)
        b[dof(p, k)] += fx * q.bary[k];
    }
    ++p;
  }
  return b;
}

double form_norm(const SparseMatrix& A, const Vector& u) {
  const double q = u.dot(A * u);
  if (q < -1e-10 * std::max(1.0, u.squaredNorm()))
    throw NumericalError("negative quadratic form value " + std::to_string(q) + ": assembly bug");
  return std::sqrt(std::max(q, 0.0));
}

double energy_norm(const TriMesh& mesh, const Coefficient& nu, const ElementSet& D, double gamma0_sq,
                   const Vector& u, NormKind which) {
  if (u.size() != 3 * D.size())
    throw InvalidArgument("vector size does not match the subdomain dofs");
  switch (which) {
  case NormKind::energy:
    return form_norm(assemble_Bplus(mesh, nu, D, gamma0_sq).matrix, u);
  case NormKind::hilbert:
    return form_norm(assemble_H(mesh, nu, D, gamma0_sq).matrix, u);
  case NormKind::l2:
    break;
  }
  return form_norm(assemble_mass(mesh, D).matrix, u);
}

} // namespace msgfem
