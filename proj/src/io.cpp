#include "msgfem/io.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace msgfem {

std::string format_double(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os << "vertices " << mesh.num_vertices() << '\n';
  for (const auto& p : mesh.vertices())
    os << format_double(p.x()) << ' ' << format_double(p.y()) << '\n';
  os << "elements " << mesh.num_elements() << '\n';
  for (const auto& el : mesh.elements())
    os << el[0] << ' ' << el[1] << ' ' << el[2] << '\n';
  os << "interior_faces " << mesh.interior_faces().size() << '\n';
  for (const auto& f : mesh.interior_faces())
    os << f.element_a << ' ' << f.element_b << ' ' << f.vertices[0] << ' ' << f.vertices[1] << '\n';
  os << "boundary_faces " << mesh.boundary_faces().size() << '\n';
  for (const auto& f : mesh.boundary_faces())
    os << f.element << ' ' << f.vertices[0] << ' ' << f.vertices[1] << '\n';
}

void write_coefficient(std::ostream& os, const Coefficient& nu) {
  for (double v : nu.values())
    os << format_double(v) << '\n';
}

namespace {
void write_set(std::ostream& os, const ElementSet& s) {
  bool first = true;
  for (int e : s) {
    if (!first)
      os << ' ';
    os << e;
    first = false;
  }
  os << '\n';
}
} // namespace

void write_decomposition(std::ostream& os, const Decomposition& dec) {
  for (const auto& sub : dec.subdomains) {
    write_set(os, sub.omega);
    write_set(os, sub.oversampling);
  }
}

void write_matrix_coo(std::ostream& os, const SparseMatrix& A) {
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
}

void write_pou(std::ostream& os, const PartitionOfUnity& pou) {
  for (const auto& chi : pou.chi) {
    for (Eigen::Index v = 0; v < chi.size(); ++v)
      os << (v ? " " : "") << format_double(chi[v]);
    os << '\n';
  }
}

} // namespace msgfem
