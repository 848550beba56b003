#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "msgfem/error.hpp"
#include "msgfem/mesh.hpp"

using namespace msgfem;

namespace {

// Euler's formula for a triangulated disc: V - E + (F + 1) = 2, every element has 3 edges.
void check_euler(const TriMesh& mesh) {
  const int V = mesh.num_vertices();
  const int T = mesh.num_elements();
  const int I = static_cast<int>(mesh.interior_faces().size());
  const int Bd = static_cast<int>(mesh.boundary_faces().size());
  CHECK(V - (I + Bd) + (T + 1) == 2);
  CHECK(2 * I + Bd == 3 * T);
}

} // namespace

TEST_CASE("structured mesh counts") {
  const TriMesh m1 = build_structured_mesh(1);
  CHECK(m1.num_elements() == 2);
  CHECK(m1.num_vertices() == 4);
  CHECK(m1.interior_faces().size() == 1);
  CHECK(m1.boundary_faces().size() == 4);

  const TriMesh m2 = build_structured_mesh(2);
  CHECK(m2.num_elements() == 8);
  CHECK(m2.num_vertices() == 9);
  CHECK(m2.interior_faces().size() == 8);
  CHECK(m2.boundary_faces().size() == 8);
  check_euler(m2);

  const TriMesh m4 = build_structured_mesh(4);
  CHECK(m4.num_elements() == 32);
  CHECK(m4.num_vertices() == 25);
  CHECK(m4.interior_faces().size() == 40);
  CHECK(m4.boundary_faces().size() == 16);
  check_euler(m4);

  CHECK_THROWS_AS(build_structured_mesh(0), InvalidArgument);
}

TEST_CASE("areas, orientation and shape regularity") {
  for (int n : {1, 3, 8}) {
    const TriMesh mesh = build_structured_mesh(n);
    double total = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& el = mesh.element(e);
      const Point a = mesh.vertex(el[1]) - mesh.vertex(el[0]);
      const Point b = mesh.vertex(el[2]) - mesh.vertex(el[0]);
      const double signed_area = 0.5 * (a.x() * b.y() - a.y() * b.x());
      CHECK(signed_area > 0.0);
      CHECK(mesh.area(e) == doctest::Approx(signed_area).epsilon(1e-14));
      total += mesh.area(e);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(mesh.max_diameter() / mesh.min_diameter() == doctest::Approx(1.0));
    CHECK(mesh.max_diameter() == doctest::Approx(std::sqrt(2.0) / n));
  }
}

TEST_CASE("face adjacency is symmetric and matching") {
  const TriMesh mesh = build_structured_mesh(5);
  for (int f = 0; f < static_cast<int>(mesh.interior_faces().size()); ++f) {
    const auto& face = mesh.interior_faces()[f];
    CHECK(face.element_a < face.element_b);
    for (int e : {face.element_a, face.element_b}) {
      const auto& faces = mesh.element_faces(e);
      CHECK(std::any_of(faces.begin(), faces.end(), [&](const FaceRef& r) {
        return r.kind == FaceRef::Kind::interior && r.index == f;
      }));
      CHECK(mesh.local_index(e, face.vertices[0]) >= 0);
      CHECK(mesh.local_index(e, face.vertices[1]) >= 0);
    }
    CHECK(mesh.interior_face_diameter(f) ==
          doctest::Approx((mesh.vertex(face.vertices[0]) - mesh.vertex(face.vertices[1])).norm()));
  }
  for (int f = 0; f < static_cast<int>(mesh.boundary_faces().size()); ++f) {
    const auto& face = mesh.boundary_faces()[f];
    for (int v : face.vertices) {
      const Point& p = mesh.vertex(v);
      CHECK((p.x() == 0.0 || p.x() == 1.0 || p.y() == 0.0 || p.y() == 1.0));
    }
  }
  // Two elements share an edge exactly when they are listed on a common interior face.
  std::set<std::pair<int, int>> neighbours;
  for (const auto& f : mesh.interior_faces())
    neighbours.insert({f.element_a, f.element_b});
  for (int a = 0; a < mesh.num_elements(); ++a)
    for (int b = a + 1; b < mesh.num_elements(); ++b) {
      int shared = 0;
      for (int v : mesh.element(a))
        shared += mesh.local_index(b, v) >= 0;
      CHECK((shared == 2) == neighbours.count({a, b}));
    }
}

TEST_CASE("vertex to element incidence matches a brute-force scan") {
  const TriMesh mesh = build_structured_mesh(4);
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    std::vector<int> brute;
    for (int e = 0; e < mesh.num_elements(); ++e)
      if (mesh.local_index(e, v) >= 0)
        brute.push_back(e);
    std::vector<int> listed(mesh.vertex_elements(v).begin(), mesh.vertex_elements(v).end());
    std::sort(listed.begin(), listed.end());
    CHECK(listed == brute);
  }
}

TEST_CASE("outward normals point away from the element") {
  const TriMesh mesh = build_structured_mesh(3);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    const Point centroid = (mesh.vertex(el[0]) + mesh.vertex(el[1]) + mesh.vertex(el[2])) / 3.0;
    for (int k = 0; k < 3; ++k) {
      const int a = el[(k + 1) % 3], b = el[(k + 2) % 3];
      const Point n = mesh.outward_normal(e, a, b);
      CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(n.dot(0.5 * (mesh.vertex(a) + mesh.vertex(b)) - centroid) > 0.0);
      CHECK(std::abs(n.dot(mesh.vertex(b) - mesh.vertex(a))) < 1e-14);
    }
  }
}

TEST_CASE("constructor rejects clockwise and non-manifold input") {
  std::vector<Point> pts{{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  CHECK_THROWS_AS(TriMesh(pts, {{0, 2, 1}}, 1), InvalidArgument);
  CHECK_THROWS_AS(TriMesh(pts, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}}, 1), InvalidArgument);
}

TEST_CASE("coefficient fields") {
  const TriMesh mesh = build_structured_mesh(4);
  CoefficientSpec c;
  const Coefficient one = coefficient_field(c, mesh);
  CHECK(one.min() == 1.0);
  CHECK(one.max() == 1.0);

  CoefficientSpec cb;
  cb.kind = CoefficientSpec::Kind::checkerboard;
  cb.contrast = 1e4;
  cb.block = 1;
  const Coefficient chk = coefficient_field(cb, mesh);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) {
      const double expected = (i + j) % 2 ? 1e4 : 1.0;
      CHECK(chk[2 * (4 * j + i)] == expected);
      CHECK(chk[2 * (4 * j + i) + 1] == expected);
    }
  CHECK(chk.contrast() == 1e4);
  cb.block = 3;
  CHECK_THROWS_AS(coefficient_field(cb, mesh), InvalidArgument);

  CoefficientSpec ch;
  ch.kind = CoefficientSpec::Kind::channels;
  ch.contrast = 50.0;
  ch.count = 1;
  const Coefficient chan = coefficient_field(ch, mesh);
  for (int e = 0; e < mesh.num_elements(); ++e)
    CHECK(chan[e] == ((e / 2) / 4 >= 2 ? 50.0 : 1.0));

  CoefficientSpec lu;
  lu.kind = CoefficientSpec::Kind::log_uniform;
  lu.nu_min = 1.0;
  lu.nu_max = 1e3;
  lu.seed = 7;
  const Coefficient a = coefficient_field(lu, mesh);
  const Coefficient b = coefficient_field(lu, mesh);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK(a.min() >= 1.0);
  CHECK(a.max() <= 1e3);
  lu.seed = 8;
  const Coefficient d = coefficient_field(lu, mesh);
  CHECK(!std::equal(a.values().begin(), a.values().end(), d.values().begin()));

  CHECK_THROWS_AS(Coefficient({1.0, 0.0}), InvalidArgument);
  lu.nu_min = -1.0;
  CHECK_THROWS_AS(coefficient_field(lu, mesh), InvalidArgument);
  const Coefficient s = chk.scaled(3.0);
  CHECK(s[1] == 3.0);
}

TEST_CASE("face data conventions") {
  const TriMesh mesh = build_structured_mesh(2);
  std::vector<double> vals(mesh.num_elements());
  for (int e = 0; e < mesh.num_elements(); ++e)
    vals[e] = 1.0 + e;
  const Coefficient nu(vals);
  for (int f = 0; f < static_cast<int>(mesh.boundary_faces().size()); ++f) {
    const FaceData d = face_data(mesh, nu, {FaceRef::Kind::boundary, f});
    const int e = mesh.boundary_faces()[f].element;
    CHECK(d.nu1 == nu[e]);
    CHECK(d.nu2 == nu[e]);
    CHECK(d.normal.norm() == doctest::Approx(1.0));
  }
  for (int f = 0; f < static_cast<int>(mesh.interior_faces().size()); ++f) {
    const auto& face = mesh.interior_faces()[f];
    const FaceData d = face_data(mesh, nu, {FaceRef::Kind::interior, f});
    CHECK(d.nu1 == nu[face.element_a]);
    CHECK(d.nu2 == nu[face.element_b]);
    CHECK(d.h_f == doctest::Approx(mesh.interior_face_diameter(f)));
    CHECK((d.normal - mesh.outward_normal(face.element_a, face.vertices[0], face.vertices[1])).norm() < 1e-15);
  }
}
