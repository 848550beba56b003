#include "msgfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "msgfem/error.hpp"
#include "msgfem/random.hpp"

namespace msgfem {

namespace {

double edge_length(const Point& a, const Point& b) { return (a - b).norm(); }

} // namespace

TriMesh::TriMesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements, int subdivisions)
    : vertices_(std::move(vertices)), elements_(std::move(elements)), subdivisions_(subdivisions) {
  const int ne = num_elements();
  const int nv = num_vertices();

  areas_.resize(ne);
  element_diameters_.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const auto& [a, b, c] = elements_[e];
    const Point pa = vertices_[a], pb = vertices_[b], pc = vertices_[c];
    const double cross = (pb.x() - pa.x()) * (pc.y() - pa.y()) - (pb.y() - pa.y()) * (pc.x() - pa.x());
    if (cross <= 0.0)
      throw InvalidArgument("element " + std::to_string(e) + " is degenerate or clockwise");
    areas_[e] = 0.5 * cross;
    element_diameters_[e] = std::max({edge_length(pa, pb), edge_length(pb, pc), edge_length(pc, pa)});
  }

  // Edge (a,b) with a < b -> adjacent elements with the local edge slot.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> edges;
  for (int e = 0; e < ne; ++e) {
    for (int k = 0; k < 3; ++k) {
      int a = elements_[e][(k + 1) % 3];
      int b = elements_[e][(k + 2) % 3];
      if (a > b)
        std::swap(a, b);
      edges[{a, b}].emplace_back(e, k);
    }
  }

  element_faces_.assign(ne, {});
  for (const auto& [key, adj] : edges) {
    const std::array<int, 2> verts{key.first, key.second};
    const double len = edge_length(vertices_[key.first], vertices_[key.second]);
    if (adj.size() == 2) {
      auto [ea, ka] = adj[0];
      auto [eb, kb] = adj[1];
      if (ea > eb) {
        std::swap(ea, eb);
        std::swap(ka, kb);
      }
      const int idx = static_cast<int>(interior_faces_.size());
      interior_faces_.push_back({ea, eb, verts});
      interior_face_diameters_.push_back(len);
      element_faces_[ea][ka] = {FaceRef::Kind::interior, idx};
      element_faces_[eb][kb] = {FaceRef::Kind::interior, idx};
    } else if (adj.size() == 1) {
      const int idx = static_cast<int>(boundary_faces_.size());
      boundary_faces_.push_back({adj[0].first, verts});
      boundary_face_diameters_.push_back(len);
      element_faces_[adj[0].first][adj[0].second] = {FaceRef::Kind::boundary, idx};
    } else {
      throw InvalidArgument("non-manifold edge (" + std::to_string(key.first) + ", " +
                            std::to_string(key.second) + ")");
    }
  }

  vertex_elem_offsets_.assign(nv + 1, 0);
  for (const auto& el : elements_)
    for (int v : el)
      ++vertex_elem_offsets_[v + 1];
  for (int v = 0; v < nv; ++v)
    vertex_elem_offsets_[v + 1] += vertex_elem_offsets_[v];
  vertex_elem_list_.resize(vertex_elem_offsets_.back());
  std::vector<int> fill(vertex_elem_offsets_.begin(), vertex_elem_offsets_.end() - 1);
  for (int e = 0; e < ne; ++e)
    for (int v : elements_[e])
      vertex_elem_list_[fill[v]++] = e;
}

std::span<const int> TriMesh::vertex_elements(int v) const {
  return std::span<const int>(vertex_elem_list_).subspan(
      vertex_elem_offsets_[v], vertex_elem_offsets_[v + 1] - vertex_elem_offsets_[v]);
}

double TriMesh::max_diameter() const {
  return *std::max_element(element_diameters_.begin(), element_diameters_.end());
}

double TriMesh::min_diameter() const {
  return *std::min_element(element_diameters_.begin(), element_diameters_.end());
}

int TriMesh::local_index(int e, int v) const {
  for (int k = 0; k < 3; ++k)
    if (elements_[e][k] == v)
      return k;
  return -1;
}

Point TriMesh::outward_normal(int e, int a, int b) const {
  const Point pa = vertices_[a], pb = vertices_[b];
  const Point t = (pb - pa).normalized();
  Point n(t.y(), -t.x());
  // Flip towards the side opposite the third vertex.
  int third = -1;
  for (int v : elements_[e])
    if (v != a && v != b)
      third = v;
  if (n.dot(vertices_[third] - pa) > 0.0)
    n = -n;
  return n;
}

TriMesh build_structured_mesh(int n) {
  if (n < 1)
    throw InvalidArgument("mesh subdivisions must be >= 1, got " + std::to_string(n));
  std::vector<Point> verts;
  verts.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      verts.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);

  std::vector<std::array<int, 3>> elems;
  elems.reserve(2 * static_cast<std::size_t>(n) * n);
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      elems.push_back({v00, v10, v11});
      elems.push_back({v00, v11, v01});
    }
  }
  return TriMesh(std::move(verts), std::move(elems), n);
}

Coefficient::Coefficient(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty())
    throw InvalidArgument("coefficient needs at least one value");
  min_ = std::numeric_limits<double>::infinity();
  max_ = 0.0;
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidArgument("coefficient values must be positive and finite");
    min_ = std::min(min_, v);
    max_ = std::max(max_, v);
  }
}

Coefficient Coefficient::scaled(double s) const {
  std::vector<double> v(values_);
  for (double& x : v)
    x *= s;
  return Coefficient(std::move(v));
}

Coefficient coefficient_field(const CoefficientSpec& spec, const TriMesh& mesh) {
  const int ne = mesh.num_elements();
  const int n = mesh.subdivisions();
  std::vector<double> values(ne);
  switch (spec.kind) {
  case CoefficientSpec::Kind::constant:
    if (!(spec.value > 0.0))
      throw InvalidArgument("constant coefficient must be positive");
    std::fill(values.begin(), values.end(), spec.value);
    break;
  case CoefficientSpec::Kind::checkerboard: {
    if (!(spec.contrast >= 1.0))
      throw InvalidArgument("checkerboard contrast must be >= 1");
    if (spec.block < 1 || n % spec.block != 0)
      throw InvalidArgument("checkerboard block size must divide the mesh subdivisions");
    for (int e = 0; e < ne; ++e) {
      const int sq = mesh.square_of(e);
      const int bi = (sq % n) / spec.block, bj = (sq / n) / spec.block;
      values[e] = ((bi + bj) % 2 == 1) ? spec.contrast : 1.0;
    }
    break;
  }
  case CoefficientSpec::Kind::channels: {
    if (!(spec.contrast >= 1.0))
      throw InvalidArgument("channel contrast must be >= 1");
    if (spec.count < 1 || 2 * spec.count > n)
      throw InvalidArgument("channel count must be in [1, n/2]");
    for (int e = 0; e < ne; ++e) {
      const int j = mesh.square_of(e) / n;
      const int band = (2 * spec.count * j) / n;
      values[e] = (band % 2 == 1) ? spec.contrast : 1.0;
    }
    break;
  }
  case CoefficientSpec::Kind::log_uniform: {
    if (!(spec.nu_min > 0.0) || !(spec.nu_max >= spec.nu_min))
      throw InvalidArgument("log_uniform bounds must satisfy 0 < nu_min <= nu_max");
    Rng rng(spec.seed);
    const double lo = std::log(spec.nu_min), hi = std::log(spec.nu_max);
    for (double& v : values)
      v = std::exp(rng.uniform(lo, hi));
    break;
  }
  }
  return Coefficient(std::move(values));
}

FaceData face_data(const TriMesh& mesh, const Coefficient& nu, FaceRef face) {
  if (face.kind == FaceRef::Kind::interior) {
    const auto& f = mesh.interior_faces()[face.index];
    return {nu[f.element_a], nu[f.element_b], mesh.interior_face_diameter(face.index),
            mesh.outward_normal(f.element_a, f.vertices[0], f.vertices[1])};
  }
  const auto& f = mesh.boundary_faces()[face.index];
  return {nu[f.element], nu[f.element], mesh.boundary_face_diameter(face.index),
          mesh.outward_normal(f.element, f.vertices[0], f.vertices[1])};
}

std::array<Point, 3> barycentric_gradients(const TriMesh& mesh, int e) {
  const auto& [i0, i1, i2] = mesh.element(e);
  const Point p0 = mesh.vertex(i0), p1 = mesh.vertex(i1), p2 = mesh.vertex(i2);
  const double two_area = 2.0 * mesh.area(e);
  return {Point(p1.y() - p2.y(), p2.x() - p1.x()) / two_area, Point(p2.y() - p0.y(), p0.x() - p2.x()) / two_area,
          Point(p0.y() - p1.y(), p1.x() - p0.x()) / two_area};
}

} // namespace msgfem
