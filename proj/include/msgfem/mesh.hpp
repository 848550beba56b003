#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace msgfem {

using Point = Eigen::Vector2d;

struct InteriorFace {
  int element_a; ///< smaller element index; its outward normal orients the face
  int element_b;
  std::array<int, 2> vertices;
};

struct BoundaryFace {
  int element;
  std::array<int, 2> vertices;
};

/// Face handle; interior and boundary faces are numbered separately.
struct FaceRef {
  enum class Kind { interior, boundary };
  Kind kind;
  int index;
};

/**
 * @brief Conforming triangulation of the unit square with face connectivity.
 *
 * Immutable once built. Elements are vertex triples in counterclockwise order;
 * every element lists its three faces so adjacency can be walked in both
 * directions.
 */
class TriMesh {
public:
  TriMesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> elements, int subdivisions);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int subdivisions() const { return subdivisions_; }

  const Point& vertex(int v) const { return vertices_[v]; }
  const std::array<int, 3>& element(int e) const { return elements_[e]; }
  std::span<const Point> vertices() const { return vertices_; }
  std::span<const std::array<int, 3>> elements() const { return elements_; }

  std::span<const InteriorFace> interior_faces() const { return interior_faces_; }
  std::span<const BoundaryFace> boundary_faces() const { return boundary_faces_; }

  /// Faces of element e (interior or boundary), one per edge.
  const std::array<FaceRef, 3>& element_faces(int e) const { return element_faces_[e]; }

  /// Elements sharing vertex v.
  std::span<const int> vertex_elements(int v) const;

  double area(int e) const { return areas_[e]; }
  double diameter(int e) const { return element_diameters_[e]; }
  double interior_face_diameter(int f) const { return interior_face_diameters_[f]; }
  double boundary_face_diameter(int f) const { return boundary_face_diameters_[f]; }
  double max_diameter() const;
  double min_diameter() const;

  /// Structured meshes only: index of the square containing element e.
  int square_of(int e) const { return e / 2; }

  /// Unit outward normal of element e across the edge (a, b).
  Point outward_normal(int e, int a, int b) const;

  /// Local position (0..2) of vertex v in element e, or -1.
  int local_index(int e, int v) const;

private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> elements_;
  int subdivisions_;
  std::vector<InteriorFace> interior_faces_;
  std::vector<BoundaryFace> boundary_faces_;
  std::vector<std::array<FaceRef, 3>> element_faces_;
  std::vector<int> vertex_elem_offsets_;
  std::vector<int> vertex_elem_list_;
  std::vector<double> areas_;
  std::vector<double> element_diameters_;
  std::vector<double> interior_face_diameters_;
  std::vector<double> boundary_face_diameters_;
};

/// n x n squares on [0,1]^2, each cut lower-left to upper-right into two triangles.
/// Square (i, j) owns elements 2(jn+i) (below the diagonal) and 2(jn+i)+1.
TriMesh build_structured_mesh(int n);

/// Piecewise-constant diffusion coefficient, one value per element.
class Coefficient {
public:
  explicit Coefficient(std::vector<double> values);

  double operator[](int e) const { return values_[e]; }
  std::span<const double> values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double min() const { return min_; }
  double max() const { return max_; }
  double contrast() const { return max_ / min_; }

  /// Same field multiplied by s > 0.
  Coefficient scaled(double s) const;

private:
  std::vector<double> values_;
  double min_;
  double max_;
};

struct CoefficientSpec {
  enum class Kind { constant, checkerboard, channels, log_uniform };
  Kind kind = Kind::constant;
  double value = 1.0;    ///< constant
  double contrast = 1.0; ///< checkerboard, channels: high value, background is 1
  int block = 1;         ///< checkerboard block size in squares
  int count = 1;         ///< channels: number of horizontal high-conductivity channels
  double nu_min = 1.0;   ///< log_uniform
  double nu_max = 1.0;
  std::uint64_t seed = 0;
};

/**
 * @brief Generate a mesh-resolved coefficient.
 *
 * - constant: every element carries `value`.
 * - checkerboard: blocks of `block` x `block` squares alternate between 1 and
 *   `contrast`; block (bi, bj) is high when bi + bj is odd.
 * - channels: square row j is high when floor(2 * count * j / n) is odd, giving
 *   `count` horizontal stripes of thickness n / (2 count).
 * - log_uniform: log(nu) uniform in [log nu_min, log nu_max], one draw per element.
 */
Coefficient coefficient_field(const CoefficientSpec& spec, const TriMesh& mesh);

struct FaceData {
  double nu1;
  double nu2;
  double h_f;
  Point normal; ///< unit outward normal of the first element
};

FaceData face_data(const TriMesh& mesh, const Coefficient& nu, FaceRef face);

/// Gradients of the barycentric coordinates of element e, in element vertex order.
std::array<Point, 3> barycentric_gradients(const TriMesh& mesh, int e);

} // namespace msgfem
