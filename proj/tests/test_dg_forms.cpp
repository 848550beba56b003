#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "msgfem/dg_forms.hpp"
#include "msgfem/error.hpp"
#include "msgfem/random.hpp"
#include "msgfem/verification.hpp"

using namespace msgfem;

namespace {

ElementSet squares(int n, int i0, int i1, int j0, int j1) {
  std::vector<int> out;
  for (int j = j0; j < j1; ++j)
    for (int i = i0; i < i1; ++i) {
      out.push_back(2 * (j * n + i));
      out.push_back(2 * (j * n + i) + 1);
    }
  return ElementSet(out);
}

Coefficient random_coefficient(const TriMesh& mesh, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  std::vector<double> v(mesh.num_elements());
  for (auto& x : v)
    x = rng.uniform(lo, hi);
  return Coefficient(v);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

double factorial(int k) { return std::tgamma(k + 1.0); }

// Exact integral of l0^a l1^b l2^c over a triangle of area A.
double barycentric_moment(double A, int a, int b, int c) {
  return 2.0 * A * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
}

} // namespace

TEST_CASE("penalty coefficient and weights") {
  CHECK(gamma_sq(2.0, 2.0, 0.25, 3.0) == doctest::Approx(3.0 * 2.0 / 0.25));
  CHECK(gamma_sq(1.0, 3.0, 0.5, 1.0) == doctest::Approx(3.0));
  CHECK(gamma_sq(1.0, 3.0, 0.5, 1.0) == gamma_sq(3.0, 1.0, 0.5, 1.0));
  CHECK_THROWS_AS(gamma_sq(0.0, 1.0, 0.5, 1.0), InvalidArgument);
  CHECK_THROWS_AS(gamma_sq(1.0, 1.0, 0.0, 1.0), InvalidArgument);

  const auto [w1, w2] = weighted_avg_weights(1.0, 3.0);
  CHECK(w1 == doctest::Approx(1.5));
  CHECK(w2 == doctest::Approx(0.5));
  CHECK(weighted_avg_weights(2.0, 2.0) == std::pair{1.0, 1.0});
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const auto [a, b] = weighted_avg_weights(rng.uniform(0.1, 10.0), rng.uniform(0.1, 10.0));
    CHECK(a + b == doctest::Approx(2.0).epsilon(1e-15));
  }
}

TEST_CASE("B on constants reduces to the boundary penalty") {
  const TriMesh mesh = build_structured_mesh(2);
  const Coefficient nu(std::vector<double>(mesh.num_elements(), 1.0));
  const double g0 = 10.0;
  const SparseMatrix B = assemble_B(mesh, nu, ElementSet::all(mesh), g0).matrix;
  const Vector one = Vector::Ones(B.rows());
  double hand = 0.0;
  for (const auto& f : mesh.boundary_faces()) {
    const double len = (mesh.vertex(f.vertices[0]) - mesh.vertex(f.vertices[1])).norm();
    hand += 2.0 * (g0 / len) * len;
  }
  CHECK(hand == doctest::Approx(16.0 * g0));
  CHECK(one.dot(B * one) == doctest::Approx(hand).epsilon(1e-13));
}

TEST_CASE("B is symmetric and homogeneous in nu") {
  const TriMesh mesh = build_structured_mesh(4);
  const Coefficient nu = random_coefficient(mesh, 11, 0.5, 20.0);
  const ElementSet all = ElementSet::all(mesh);
  const Matrix B = Matrix(assemble_B(mesh, nu, all, 10.0).matrix);
  CHECK(max_abs(B - B.transpose()) <= 1e-13);
  const Matrix B4 = Matrix(assemble_B(mesh, nu.scaled(4.0), all, 10.0).matrix);
  CHECK(max_abs(B4 - 4.0 * B) == 0.0);
  const Matrix B3 = Matrix(assemble_B(mesh, nu.scaled(3.0), all, 10.0).matrix);
  CHECK(max_abs(B3 - 3.0 * B) <= 1e-14 * max_abs(B3));
}

TEST_CASE("face-sum consistency") {
  const TriMesh mesh = build_structured_mesh(3);
  const Coefficient nu = random_coefficient(mesh, 5, 1.0, 100.0);
  const double g0 = 7.0;
  const FormTerms terms = FormTerms::bilinear();
  Matrix dense = Matrix::Zero(3 * mesh.num_elements(), 3 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e)
    dense.block<3, 3>(3 * e, 3 * e) += element_matrix(mesh, nu, e, terms);
  auto add_face = [&](FaceRef ref) {
    const FaceMatrix fm = face_matrix(mesh, nu, ref, g0, terms);
    for (std::size_t a = 0; a < fm.elements.size(); ++a)
      for (std::size_t b = 0; b < fm.elements.size(); ++b)
        dense.block<3, 3>(3 * fm.elements[a], 3 * fm.elements[b]) += fm.values.block<3, 3>(3 * a, 3 * b);
  };
  // Reverse order on purpose.
  for (int f = static_cast<int>(mesh.boundary_faces().size()) - 1; f >= 0; --f)
    add_face({FaceRef::Kind::boundary, f});
  for (int f = static_cast<int>(mesh.interior_faces().size()) - 1; f >= 0; --f)
    add_face({FaceRef::Kind::interior, f});
  const Matrix B = Matrix(assemble_B(mesh, nu, ElementSet::all(mesh), g0).matrix);
  CHECK(max_abs(B - dense) <= 1e-13 * std::max(1.0, max_abs(B)));
}

TEST_CASE("B on a continuous linear function leaves only boundary terms") {
  // Elementwise integration by parts: for linear continuous u and nu = 1 the
  // volume term cancels the interior consistency term and the interior penalty vanishes.
  const TriMesh mesh = build_structured_mesh(4);
  const Coefficient nu(std::vector<double>(mesh.num_elements(), 1.0));
  const double g0 = 5.0;
  const SparseMatrix B = assemble_B(mesh, nu, ElementSet::all(mesh), g0).matrix;
  auto lin = [](const Point& p) { return 0.3 + 1.7 * p.x() - 0.9 * p.y(); };
  Vector u(3 * mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e)
    for (int k = 0; k < 3; ++k)
      u[dof(e, k)] = lin(mesh.vertex(mesh.element(e)[k]));
  Rng rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    Vector v(u.size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = rng.uniform(-1.0, 1.0);
    double expected = 0.0;
    for (const auto& f : mesh.boundary_faces()) {
      const int e = f.element;
      const Point a = mesh.vertex(f.vertices[0]), b = mesh.vertex(f.vertices[1]);
      const double len = (a - b).norm();
      const Point n = mesh.outward_normal(e, f.vertices[0], f.vertices[1]);
      const auto g = barycentric_gradients(mesh, e);
      const int ka = mesh.local_index(e, f.vertices[0]), kb = mesh.local_index(e, f.vertices[1]);
      const double va = v[dof(e, ka)], vb = v[dof(e, kb)];
      const Point grad_v = v[dof(e, 0)] * g[0] + v[dof(e, 1)] * g[1] + v[dof(e, 2)] * g[2];
      const double ua = lin(a), ub = lin(b);
      const double gamma2 = g0 / len;
      // int_F u v and int_F u, int_F v for linear traces.
      const double uv = len / 6.0 * (2 * ua * va + ua * vb + ub * va + 2 * ub * vb);
      expected += 2.0 * gamma2 * uv - grad_v.dot(n) * len * (ua + ub) / 2.0;
    }
    CHECK(v.dot(B * u) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("kernel of B+ and positivity") {
  const TriMesh mesh = build_structured_mesh(8);
  const Coefficient nu = random_coefficient(mesh, 21, 1.0, 1e4);
  const double g0 = 10.0;
  const ElementSet interior = squares(8, 2, 6, 1, 5);
  const SparseMatrix Bp = assemble_Bplus(mesh, nu, interior, g0).matrix;
  const Vector one = Vector::Ones(Bp.rows());
  const double scale = (Bp.cwiseAbs() * one).maxCoeff();
  CHECK((Bp * one).cwiseAbs().maxCoeff() <= 1e-12 * scale);

  const ElementSet edge = squares(8, 0, 3, 2, 5);
  const SparseMatrix Bpe = assemble_Bplus(mesh, nu, edge, g0).matrix;
  const Vector one_e = Vector::Ones(Bpe.rows());
  CHECK(one_e.dot(Bpe * one_e) > 0.0);

  for (const ElementSet& D : {interior, edge, squares(8, 1, 8, 3, 8)}) {
    const Matrix A = Matrix(assemble_Bplus(mesh, nu, D, g0).matrix);
    const Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) >= -1e-12 * es.eigenvalues().cwiseAbs().maxCoeff());
    const Matrix H = Matrix(assemble_H(mesh, nu, D, g0).matrix);
    const Eigen::SelfAdjointEigenSolver<Matrix> hs(H, Eigen::EigenvaluesOnly);
    CHECK(hs.eigenvalues()(0) > 0.0);
    const Matrix M = Matrix(assemble_mass(mesh, D).matrix);
    CHECK(max_abs(H - A - M) <= 1e-13 * max_abs(H));
  }

  const SparseMatrix H = assemble_H(mesh, nu, interior, g0).matrix;
  double area = 0.0;
  for (int e : interior)
    area += mesh.area(e);
  CHECK(one.dot(H * one) == doctest::Approx(area).epsilon(1e-10));
}

TEST_CASE("load vector moments") {
  const TriMesh mesh = build_structured_mesh(3);
  const ElementSet D = squares(3, 0, 2, 1, 3);
  CHECK(assemble_load(mesh, [](const Point&) { return 0.0; }, D).cwiseAbs().maxCoeff() == 0.0);
  const Vector one = assemble_load(mesh, [](const Point&) { return 1.0; }, D);
  double area = 0.0;
  for (int e : D)
    area += mesh.area(e);
  CHECK(one.sum() == doctest::Approx(area).epsilon(1e-14));

  // f = x and f = x^2 expanded in barycentric coordinates, moments in closed form.
  const Vector fx = assemble_load(mesh, [](const Point& p) { return p.x(); }, D);
  const Vector fxx = assemble_load(mesh, [](const Point& p) { return p.x() * p.x(); }, D);
  int rank = 0;
  for (int e : D) {
    const auto& el = mesh.element(e);
    const double A = mesh.area(e);
    const double x[3] = {mesh.vertex(el[0]).x(), mesh.vertex(el[1]).x(), mesh.vertex(el[2]).x()};
    for (int k = 0; k < 3; ++k) {
      double m1 = 0.0, m2 = 0.0;
      for (int i = 0; i < 3; ++i) {
        int p1[3] = {0, 0, 0};
        p1[i] += 1;
        p1[k] += 1;
        m1 += x[i] * barycentric_moment(A, p1[0], p1[1], p1[2]);
        for (int j = 0; j < 3; ++j) {
          int p2[3] = {0, 0, 0};
          p2[i] += 1;
          p2[j] += 1;
          p2[k] += 1;
          m2 += x[i] * x[j] * barycentric_moment(A, p2[0], p2[1], p2[2]);
        }
      }
      CHECK(fx[3 * rank + k] == doctest::Approx(m1).epsilon(1e-13));
      CHECK(fxx[3 * rank + k] == doctest::Approx(m2).epsilon(1e-13));
    }
    ++rank;
  }
}

TEST_CASE("norms") {
  const TriMesh mesh = build_structured_mesh(6);
  const Coefficient nu = random_coefficient(mesh, 2, 1.0, 10.0);
  const ElementSet D = squares(6, 1, 5, 1, 5);
  const Vector zero = Vector::Zero(3 * D.size());
  CHECK(energy_norm(mesh, nu, D, 10.0, zero, NormKind::energy) == 0.0);
  const Vector c = Vector::Constant(3 * D.size(), 2.5);
  CHECK(energy_norm(mesh, nu, D, 10.0, c, NormKind::energy) <= 1e-6);
  CHECK(energy_norm(mesh, nu, D, 10.0, c, NormKind::l2) == doctest::Approx(2.5 * std::sqrt(D.size() / 72.0)));
  Rng rng(4);
  Vector u(3 * D.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    u[i] = rng.uniform(-1.0, 1.0);
  const double e = energy_norm(mesh, nu, D, 10.0, u, NormKind::energy);
  const double l = energy_norm(mesh, nu, D, 10.0, u, NormKind::l2);
  const double h = energy_norm(mesh, nu, D, 10.0, u, NormKind::hilbert);
  CHECK(h * h == doctest::Approx(e * e + l * l).epsilon(1e-12));
}

TEST_CASE("coercivity interval does not depend on the contrast") {
  const TriMesh mesh = build_structured_mesh(8);
  const Coefficient flat(std::vector<double>(mesh.num_elements(), 1.0));
  CoefficientSpec spec;
  spec.kind = CoefficientSpec::Kind::checkerboard;
  spec.contrast = 1e4;
  spec.block = 2;
  const Coefficient rough = coefficient_field(spec, mesh);
  const CoercivityInterval a = coercivity_interval(mesh, flat, 10.0);
  const CoercivityInterval b = coercivity_interval(mesh, rough, 10.0);
  MESSAGE("contrast 1: [" << a.alpha << ", " << a.continuity << "], contrast 1e4: [" << b.alpha << ", "
                          << b.continuity << "]");
  CHECK(a.alpha > 0.0);
  CHECK(std::abs(b.alpha - a.alpha) <= 0.1 * a.alpha);
  CHECK(std::abs(b.continuity - a.continuity) <= 0.1 * a.continuity);
}

TEST_CASE("jumps of the elementwise projection of a smooth function shrink with h") {
  using std::numbers::pi;
  const Source f = [](const Point& p) { return std::sin(pi * p.x()) * std::sin(pi * p.y()); };
  std::vector<double> jumps, hs;
  for (int n : {8, 16, 32}) {
    const TriMesh mesh = build_structured_mesh(n);
    const Coefficient nu(std::vector<double>(mesh.num_elements(), 1.0));
    jumps.push_back(jump_seminorm(mesh, nu, 10.0, elementwise_l2_projection(mesh, f)));
    hs.push_back(mesh.max_diameter());
  }
  for (int i = 0; i + 1 < 3; ++i)
    CHECK(observed_rate(jumps[i], jumps[i + 1], hs[i], hs[i + 1]) >= 0.9);
}
