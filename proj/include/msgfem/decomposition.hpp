#pragma once

#include <initializer_list>
#include <span>
#include <vector>

#include "msgfem/mesh.hpp"

namespace msgfem {

/// Sorted, duplicate-free set of element indices describing a mesh-resolved subdomain.
class ElementSet {
public:
  ElementSet() = default;
  /// Sorts and deduplicates.
  explicit ElementSet(std::vector<int> members);
  ElementSet(std::initializer_list<int> members) : ElementSet(std::vector<int>(members)) {}

  static ElementSet all(const TriMesh& mesh);

  std::span<const int> members() const { return members_; }
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  bool contains(int e) const;
  bool is_subset_of(const ElementSet& other) const;

  /// position[e] = rank of e within the set, or -1; sized to the mesh.
  std::vector<int> positions(int num_elements) const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const ElementSet&, const ElementSet&) = default;

private:
  std::vector<int> members_;
};

ElementSet set_union(const ElementSet& a, const ElementSet& b);
ElementSet set_difference(const ElementSet& a, const ElementSet& b);

/// Elements whose closure meets the closure of D (D plus all vertex neighbours).
ElementSet d_plus(const TriMesh& mesh, const ElementSet& D);

/// Elements of D whose closure does not touch any element outside D.
/// Complements are taken in the mesh, so the outer boundary never shrinks D.
ElementSet d_minus(const TriMesh& mesh, const ElementSet& D);

/// d_plus applied `layers` times.
ElementSet grow(const TriMesh& mesh, const ElementSet& D, int layers);

/// True when some face of an element of D lies on the outer boundary.
bool touches_boundary(const TriMesh& mesh, const ElementSet& D);

struct Subdomain {
  ElementSet core;         ///< the grid cell itself, before overlap growth
  ElementSet omega;        ///< overlapping subdomain
  ElementSet oversampling; ///< oversampling domain containing omega
};

/**
 * @brief Overlapping m x m grid decomposition of a structured mesh.
 *
 * Subdomain j = jy * m + jx starts from the squares of grid cell (jx, jy),
 * grows `overlap` vertex-neighbour layers to form omega_j and `oversampling`
 * further layers to form omega*_j. Growth stops at the outer boundary.
 */
struct Decomposition {
  int grid = 1;
  int overlap = 0;
  int oversampling = 0;
  std::vector<Subdomain> subdomains;

  int size() const { return static_cast<int>(subdomains.size()); }
};

Decomposition build_decomposition(const TriMesh& mesh, int m, int overlap, int oversampling);

/// Maximum number of sets containing any single element.
int coloring_constant(const TriMesh& mesh, std::span<const ElementSet> sets);

/// Coloring constants of {omega_j} and {omega*_j}.
int overlap_coloring(const TriMesh& mesh, const Decomposition& dec);
int oversampling_coloring(const TriMesh& mesh, const Decomposition& dec);

} // namespace msgfem
