#pragma once

#include <ostream>
#include <string>

#include "msgfem/decomposition.hpp"
#include "msgfem/dg_forms.hpp"
#include "msgfem/space_ops.hpp"

namespace msgfem {

/// Sections "vertices", "elements", "interior_faces", "boundary_faces", one record per line, 0-based.
void write_mesh(std::ostream& os, const TriMesh& mesh);

/// One coefficient value per element line.
void write_coefficient(std::ostream& os, const Coefficient& nu);

/// Two lines per subdomain: the elements of omega_j, then those of omega*_j.
void write_decomposition(std::ostream& os, const Decomposition& dec);

/// "row col value" per stored entry.
void write_matrix_coo(std::ostream& os, const SparseMatrix& A);

/// One line per subdomain with the vertex values of chi_j.
void write_pou(std::ostream& os, const PartitionOfUnity& pou);

/// Shortest decimal text that reads back to the same double ("inf", "nan" for non-finite).
std::string format_double(double x);

} // namespace msgfem
