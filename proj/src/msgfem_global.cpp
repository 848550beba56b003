#include "msgfem/msgfem_global.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "msgfem/error.hpp"

namespace msgfem {

CoarseAssembly assemble_coarse(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq,
                               const Decomposition& dec, const PartitionOfUnity& pou,
                               std::span<const LocalSpectralData> locals, std::span<const int> counts) {
  if (static_cast<int>(locals.size()) != dec.size() || counts.size() != locals.size())
    throw InvalidArgument("assemble_coarse: need local data and a mode count for every subdomain");
  const ElementSet everything = ElementSet::all(mesh);
  const SparseMatrix H = assemble_H(mesh, nu, everything, gamma0_sq).matrix;
  const Eigen::Index ndof = 3 * mesh.num_elements();

  CoarseAssembly out;
  std::vector<Vector> particulars;
  for (const auto& l : locals)
    particulars.push_back(l.particular);
  out.particular = pou_blend(mesh, dec, pou, particulars);

  int total = 0;
  for (int c : counts)
    total += c;
  Matrix raw(ndof, total);
  std::vector<int> owner, mode;
  int col = 0;
  for (int j = 0; j < dec.size(); ++j) {
    const auto& sub = dec.subdomains[j];
    const auto& chi = pou.chi[j];
    const std::span<const double> chi_span(chi.data(), chi.size());
    const Matrix local = select_coarse(mesh, sub.omega, sub.oversampling, locals[j].harmonic, locals[j].eig, counts[j]);
    for (int k = 0; k < counts[j]; ++k) {
      const Vector blended = interpolate_product(mesh, chi_span, sub.omega, local.col(k));
      raw.col(col++) = extend_by_zero(mesh, blended, sub.omega, everything);
      owner.push_back(j);
      mode.push_back(k);
    }
  }

  // Two-pass Gram-Schmidt in the H inner product; near-dependent columns are dropped.
  CoarseSpace& cs = out.coarse;
  std::vector<int> keep;
  Matrix Q(ndof, total);
  int kept = 0;
  for (int c = 0; c < total; ++c) {
    const Vector v = raw.col(c);
    const double vnorm = std::sqrt(std::max(v.dot(H * v), 0.0));
    if (vnorm == 0.0) {
      ++cs.dropped;
      continue;
    }
    Vector r = v;
    for (int pass = 0; pass < 2 && kept > 0; ++pass) {
      const Vector proj = Q.leftCols(kept).transpose() * (H * r);
      r -= Q.leftCols(kept) * proj;
    }
    const double rnorm = std::sqrt(std::max(r.dot(H * r), 0.0));
    if (rnorm <= 1e-10 * vnorm) {
      ++cs.dropped;
      continue;
    }
    Q.col(kept) = r / rnorm;
    keep.push_back(c);
    ++kept;
  }

  cs.basis.resize(ndof, kept);
  for (int i = 0; i < kept; ++i) {
    cs.basis.col(i) = raw.col(keep[i]);
    cs.owner.push_back(owner[keep[i]]);
    cs.mode.push_back(mode[keep[i]]);
  }
  cs.orthonormal = Q.leftCols(kept);
  cs.offsets.assign(dec.size() + 1, 0);
  for (int j : cs.owner)
    ++cs.offsets[j + 1];
  for (int j = 0; j < dec.size(); ++j)
    cs.offsets[j + 1] += cs.offsets[j];
  return out;
}

CoarseSolve solve_coarse(const SparseMatrix& B, const Vector& F, const CoarseSpace& coarse, const Vector& u_p) {
  CoarseSolve out;
  out.correction = Vector::Zero(F.size());
  if (coarse.size() == 0)
    return out;
  const Matrix& C = coarse.orthonormal;
  const Matrix BC = B * C;
  Matrix R = C.transpose() * BC;
  const double scale = std::max(R.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  out.reduced_asymmetry = (R - R.transpose()).cwiseAbs().maxCoeff() / scale;
  R = 0.5 * (R + R.transpose());
  const Vector rhs = C.transpose() * (F - B * u_p);

  const Eigen::LLT<Matrix> llt(R);
  if (llt.info() != Eigen::Success)
    throw NumericalError("reduced coarse matrix is not positive definite: gamma0 is too small for coercivity");
  const Vector y = llt.solve(rhs);
  const double rn = rhs.norm();
  out.residual = rn > 0.0 ? (R * y - rhs).norm() / rn : 0.0;
  out.correction = C * y;
  return out;
}

ErrorReport error_report(const SparseMatrix& Bplus, const SparseMatrix& mass, const Vector& u_g,
                         const Vector& u_fine) {
  if (u_g.size() != u_fine.size())
    throw InvalidArgument("error_report: vectors live on different dof maps");
  ErrorReport r;
  const Vector e = u_fine - u_g;
  r.energy_error = form_norm(Bplus, e);
  r.l2_error = form_norm(mass, e);
  const double en = form_norm(Bplus, u_fine);
  const double ln = form_norm(mass, u_fine);
  r.rel_energy_error = en > 0.0 ? r.energy_error / en : r.energy_error;
  r.rel_l2_error = ln > 0.0 ? r.l2_error / ln : r.l2_error;
  return r;
}

double max_sqrt_lambda_next(std::span<const LocalSpectralData> locals, std::span<const int> counts) {
  double worst = 0.0;
  for (std::size_t j = 0; j < locals.size(); ++j) {
    const auto& vals = locals[j].eig.values;
    if (counts[j] < vals.size())
      worst = std::max(worst, std::sqrt(std::max(vals[counts[j]], 0.0)));
  }
  return worst;
}

} // namespace msgfem
