#include "msgfem/decomposition.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>

#include "msgfem/error.hpp"

namespace msgfem {

ElementSet::ElementSet(std::vector<int> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (!members_.empty() && members_.front() < 0)
    throw InvalidArgument("negative element index in ElementSet");
}

ElementSet ElementSet::all(const TriMesh& mesh) {
  std::vector<int> m(mesh.num_elements());
  std::iota(m.begin(), m.end(), 0);
  return ElementSet(std::move(m));
}

bool ElementSet::contains(int e) const { return std::binary_search(members_.begin(), members_.end(), e); }

bool ElementSet::is_subset_of(const ElementSet& other) const {
  return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
}

std::vector<int> ElementSet::positions(int num_elements) const {
  std::vector<int> pos(num_elements, -1);
  for (int i = 0; i < size(); ++i)
    pos[members_[i]] = i;
  return pos;
}

ElementSet set_union(const ElementSet& a, const ElementSet& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return ElementSet(std::move(out));
}

ElementSet set_difference(const ElementSet& a, const ElementSet& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return ElementSet(std::move(out));
}

ElementSet d_plus(const TriMesh& mesh, const ElementSet& D) {
  std::vector<char> mark(mesh.num_elements(), 0);
  for (int e : D)
    for (int v : mesh.element(e))
      for (int t : mesh.vertex_elements(v))
        mark[t] = 1;
  std::vector<int> out;
  for (int e = 0; e < mesh.num_elements(); ++e)
    if (mark[e])
      out.push_back(e);
  return ElementSet(std::move(out));
}

ElementSet d_minus(const TriMesh& mesh, const ElementSet& D) {
  std::vector<char> in(mesh.num_elements(), 0);
  for (int e : D)
    in[e] = 1;
  std::vector<int> out;
  for (int e : D) {
    bool inner = true;
    for (int v : mesh.element(e))
      for (int t : mesh.vertex_elements(v))
        inner = inner && in[t];
    if (inner)
      out.push_back(e);
  }
  return ElementSet(std::move(out));
}

ElementSet grow(const TriMesh& mesh, const ElementSet& D, int layers) {
  ElementSet out = D;
  for (int k = 0; k < layers; ++k)
    out = d_plus(mesh, out);
  return out;
}

bool touches_boundary(const TriMesh& mesh, const ElementSet& D) {
  for (const auto& f : mesh.boundary_faces())
    if (D.contains(f.element))
      return true;
  return false;
}

Decomposition build_decomposition(const TriMesh& mesh, int m, int overlap, int oversampling) {
  if (m < 1)
    throw InvalidArgument("decomposition grid size must be >= 1");
  if (overlap < 2)
    throw InvalidArgument("overlap layers must be >= 2 so that the shrunk subdomains still cover the mesh, got " +
                          std::to_string(overlap));
  if (oversampling < 1)
    throw InvalidArgument("oversampling layers must be >= 1");
  const int n = mesh.subdivisions();
  if (m > n)
    throw InvalidArgument("decomposition grid larger than the mesh");

  Decomposition dec;
  dec.grid = m;
  dec.overlap = overlap;
  dec.oversampling = oversampling;

  // Squares are assigned to cells by floor(i * m / n), which spreads any
  // remainder evenly and keeps cells contiguous.
  std::vector<std::vector<int>> cells(static_cast<std::size_t>(m) * m);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const int sq = mesh.square_of(e);
    const int ci = (sq % n) * m / n, cj = (sq / n) * m / n;
    cells[cj * m + ci].push_back(e);
  }

  const int ne = mesh.num_elements();
  for (auto& cell : cells) {
    Subdomain s;
    s.core = ElementSet(std::move(cell));
    s.omega = grow(mesh, s.core, overlap);
    s.oversampling = grow(mesh, s.omega, oversampling);
    if (m > 1 && s.omega.size() == ne)
      throw InvalidArgument("overlap too large: a subdomain covers the whole mesh");
    dec.subdomains.push_back(std::move(s));
  }
  return dec;
}

int coloring_constant(const TriMesh& mesh, std::span<const ElementSet> sets) {
  std::vector<int> count(mesh.num_elements(), 0);
  for (const auto& s : sets)
    for (int e : s)
      ++count[e];
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

int overlap_coloring(const TriMesh& mesh, const Decomposition& dec) {
  std::vector<ElementSet> sets;
  for (const auto& s : dec.subdomains)
    sets.push_back(s.omega);
  return coloring_constant(mesh, sets);
}

int oversampling_coloring(const TriMesh& mesh, const Decomposition& dec) {
  std::vector<ElementSet> sets;
  for (const auto& s : dec.subdomains)
    sets.push_back(s.oversampling);
  return coloring_constant(mesh, sets);
}

} // namespace msgfem
