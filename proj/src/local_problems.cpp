#include "msgfem/local_problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>

#include "msgfem/error.hpp"

namespace msgfem {

namespace {

/// B_{omega*} split into H0 (interior) and layer blocks with a factorised interior block.
struct LocalSystem {
  SparseMatrix B;
  std::vector<int> interior;
  std::vector<int> layer;
  SparseMatrix B_ii;
  Eigen::SimplicialLDLT<SparseMatrix> solver;

  LocalSystem(const TriMesh& mesh, const Coefficient& nu, const ElementSet& omega_star, double gamma0_sq) {
    B = assemble_B(mesh, nu, omega_star, gamma0_sq).matrix;
    const SubspaceMask mask = h0_mask(mesh, omega_star);
    interior = mask.dofs;
    for (int i = 0; i < static_cast<int>(mask.active.size()); ++i)
      if (!mask.active[i])
        layer.push_back(i);
    if (interior.empty())
      throw NumericalError("oversampling domain has no H0 dofs");
    B_ii = submatrix(B, interior, interior);
    solver.compute(B_ii);
    if (solver.info() != Eigen::Success)
      throw NumericalError("local H0 system is singular: check face conventions, H0 mask or gamma0");
    const auto d = solver.vectorD();
    if (d.cwiseAbs().minCoeff() <= 1e-14 * d.cwiseAbs().maxCoeff())
      throw NumericalError("local H0 system is numerically singular");
  }

  Vector source_solution(const Vector& load) const {
    Vector rhs(interior.size());
    for (std::size_t i = 0; i < interior.size(); ++i)
      rhs[i] = load[interior[i]];
    const Vector x = solver.solve(rhs);
    const double bn = rhs.norm();
    if (bn > 0.0) {
      // Normwise backward error, as for the global solve.
      const double an = (B_ii.cwiseAbs() * Vector::Ones(B_ii.cols())).maxCoeff();
      const double res = (B_ii * x - rhs).norm() / (an * x.norm() + bn);
      if (!(res <= 1e-10))
        throw NumericalError("local source problem residual " + std::to_string(res));
    }
    Vector psi = Vector::Zero(B.rows());
    for (std::size_t i = 0; i < interior.size(); ++i)
      psi[interior[i]] = x[i];
    return psi;
  }

  HarmonicBasis harmonic() const {
    HarmonicBasis hb;
    hb.layer_dofs = layer;
    hb.interior_dofs = interior;
    const int n = static_cast<int>(B.rows());
    const int nl = static_cast<int>(layer.size());
    hb.basis = Matrix::Zero(n, nl);
    if (nl == 0)
      return hb;
    const Matrix coupling = Matrix(submatrix(B, interior, layer));
    const Matrix ext = -solver.solve(coupling);
    for (int k = 0; k < nl; ++k) {
      hb.basis(layer[k], k) = 1.0;
      for (std::size_t i = 0; i < interior.size(); ++i)
        hb.basis(interior[i], k) = ext(i, k);
    }
    return hb;
  }
};

Vector constant_coefficients(const HarmonicBasis& hb) {
  return Vector::Ones(static_cast<Eigen::Index>(hb.layer_dofs.size()));
}

/// Rows of the omega*-local matrix X mapped to omega-local dofs and scaled by chi.
Matrix apply_pou_interpolation(const TriMesh& mesh, std::span<const double> chi, const ElementSet& omega,
                               const ElementSet& omega_star, const Matrix& X) {
  const auto pos = omega_star.positions(mesh.num_elements());
  Matrix out(3 * omega.size(), X.cols());
  int p = 0;
  for (int e : omega) {
    const auto& el = mesh.element(e);
    for (int k = 0; k < 3; ++k)
      out.row(dof(p, k)) = chi[el[k]] * X.row(dof(pos[e], k));
    ++p;
  }
  return out;
}

Matrix symmetric_part(const Matrix& X) { return 0.5 * (X + X.transpose()); }

} // namespace

SparseMatrix submatrix(const SparseMatrix& A, std::span<const int> rows, std::span<const int> cols) {
  std::vector<int> rmap(A.rows(), -1), cmap(A.cols(), -1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    rmap[rows[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < cols.size(); ++i)
    cmap[cols[i]] = static_cast<int>(i);
  std::vector<Eigen::Triplet<double>> trip;
  for (int c = 0; c < A.outerSize(); ++c) {
    if (cmap[c] < 0)
      continue;
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      if (rmap[it.row()] >= 0)
        trip.emplace_back(rmap[it.row()], cmap[c], it.value());
  }
  SparseMatrix S(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  S.setFromTriplets(trip.begin(), trip.end());
  return S;
}

HarmonicBasis harmonic_basis(const TriMesh& mesh, const Coefficient& nu, const ElementSet& omega_star,
                             double gamma0_sq) {
  return LocalSystem(mesh, nu, omega_star, gamma0_sq).harmonic();
}

double harmonic_residual(const TriMesh& mesh, const Coefficient& nu, const ElementSet& omega_star,
                         double gamma0_sq, const Matrix& basis) {
  const SparseMatrix B = assemble_B(mesh, nu, omega_star, gamma0_sq).matrix;
  const SparseMatrix H = assemble_H(mesh, nu, omega_star, gamma0_sq).matrix;
  const SubspaceMask mask = h0_mask(mesh, omega_star);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    const Vector v = basis.col(k);
    const Vector Bv = B * v;
    double r = 0.0;
    for (int i : mask.dofs)
      r = std::max(r, std::abs(Bv[i]));
    worst = std::max(worst, r / form_norm(H, v));
  }
  return worst;
}

Vector local_source_solution(const TriMesh& mesh, const Coefficient& nu, const Source& f,
                             const ElementSet& omega_star, double gamma0_sq) {
  const LocalSystem sys(mesh, nu, omega_star, gamma0_sq);
  return sys.source_solution(assemble_load(mesh, f, omega_star));
}

Vector particular_solution(const TriMesh& mesh, const Coefficient& nu, const Source& f, const ElementSet& omega,
                           const ElementSet& omega_star, double gamma0_sq) {
  const Vector psi = local_source_solution(mesh, nu, f, omega_star, gamma0_sq);
  return restrict_vector(mesh, psi, omega_star, omega);
}

EigenPencil eigen_pencil(const TriMesh& mesh, const Coefficient& nu, std::span<const double> chi,
                         const ElementSet& omega, const ElementSet& omega_star, double gamma0_sq,
                         const HarmonicBasis& hb) {
  const SparseMatrix Bp_omega = assemble_Bplus(mesh, nu, omega, gamma0_sq).matrix;
  const SparseMatrix Bp_star = assemble_Bplus(mesh, nu, omega_star, gamma0_sq).matrix;
  const Matrix PPhi = apply_pou_interpolation(mesh, chi, omega, omega_star, hb.basis);
  EigenPencil pencil;
  pencil.A = symmetric_part(PPhi.transpose() * (Bp_omega * PPhi));
  pencil.M = symmetric_part(hb.basis.transpose() * (Bp_star * hb.basis));
  return pencil;
}

Eigenpairs solve_pencil(const EigenPencil& pencil, const Vector& kernel_candidate) {
  const Matrix& A = pencil.A;
  const Matrix& M = pencil.M;
  const Eigen::Index n = A.rows();
  Eigenpairs out;
  if (n == 0)
    return out;

  const Eigen::SelfAdjointEigenSolver<Matrix> mass_spectrum(M, Eigen::EigenvaluesOnly);
  out.min_mass_eigenvalue = mass_spectrum.eigenvalues()(0);
  const double mass_scale = std::max(mass_spectrum.eigenvalues()(n - 1), std::numeric_limits<double>::min());

  // Kernel of M: the constant function when omega* is interior.
  Matrix K(n, 0);
  if (kernel_candidate.size() == n) {
    const Vector k = kernel_candidate.normalized();
    if ((M * k).norm() <= 1e-10 * mass_scale) {
      K = k;
      out.kernel_dim = 1;
    }
  }

  Matrix Z;
  if (out.kernel_dim > 0) {
    const Eigen::HouseholderQR<Matrix> qr(K);
    const Matrix Q = qr.householderQ();
    Z = Q.rightCols(n - out.kernel_dim);
  } else {
    Z = Matrix::Identity(n, n);
  }

  const Matrix AZ = A * Z;
  Matrix A_red = symmetric_part(Z.transpose() * AZ);
  const Matrix M_red = symmetric_part(Z.transpose() * M * Z);
  Matrix correction; // kernel component of each finite eigenvector, per unit of reduced vector
  if (out.kernel_dim > 0) {
    const Matrix A_kk = K.transpose() * A * K;
    const Matrix A_kz = K.transpose() * AZ;
    Eigen::LDLT<Matrix> kk(A_kk);
    if (A_kk.norm() > 1e-14 * std::max(A.norm(), 1e-300)) {
      correction = -kk.solve(A_kz);
      A_red = symmetric_part(A_red + A_kz.transpose() * correction);
    } else {
      correction = Matrix::Zero(out.kernel_dim, Z.cols());
    }
  }

  const Eigen::LLT<Matrix> chol(M_red);
  if (chol.info() != Eigen::Success)
    throw NumericalError("B+ pencil matrix is indefinite on the complement of its kernel: assembly bug");

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(A_red, M_red, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success)
    throw NumericalError("generalized eigensolver failed");

  const Eigen::Index nf = Z.cols();
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < out.kernel_dim; ++k) {
    out.values[k] = std::numeric_limits<double>::infinity();
    out.vectors.col(k) = K.col(k);
  }
  const double a_norm = std::max(A.norm(), std::numeric_limits<double>::min());
  for (Eigen::Index i = 0; i < nf; ++i) {
    const Eigen::Index src = nf - 1 - i; // ascending -> descending
    const Vector y = ges.eigenvectors().col(src);
    Vector x = Z * y;
    if (out.kernel_dim > 0)
      x += K * (correction * y);
    const double lambda = ges.eigenvalues()(src);
    out.values[out.kernel_dim + i] = lambda;
    out.vectors.col(out.kernel_dim + i) = x;
    const double res = (A * x - lambda * (M * x)).norm() / (a_norm * x.norm());
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

Eigenpairs eigenproblem(const TriMesh& mesh, const Coefficient& nu, std::span<const double> chi,
                        const ElementSet& omega, const ElementSet& omega_star, double gamma0_sq,
                        const HarmonicBasis& hb) {
  const EigenPencil pencil = eigen_pencil(mesh, nu, chi, omega, omega_star, gamma0_sq, hb);
  const Vector candidate = touches_boundary(mesh, omega_star) ? Vector() : constant_coefficients(hb);
  return solve_pencil(pencil, candidate);
}

int select_count(const Eigenpairs& eig, const CoarseRule& rule) {
  const int available = static_cast<int>(eig.values.size());
  if (rule.kind == CoarseRule::Kind::fixed) {
    if (rule.count < 0)
      throw InvalidArgument("fixed coarse rule needs a nonnegative count");
    if (rule.count > available)
      throw InvalidArgument("requested " + std::to_string(rule.count) + " modes but only " +
                            std::to_string(available) + " are available");
    return std::max(rule.count, eig.kernel_dim);
  }
  int n = eig.kernel_dim;
  for (int k = eig.kernel_dim; k < available; ++k)
    if (std::sqrt(std::max(eig.values[k], 0.0)) >= rule.tau)
      ++n;
  return n;
}

Matrix select_coarse(const TriMesh& mesh, const ElementSet& omega, const ElementSet& omega_star,
                     const HarmonicBasis& hb, const Eigenpairs& eig, int n) {
  if (n > eig.values.size())
    throw InvalidArgument("more coarse modes requested than eigenpairs available");
  const Matrix phi = hb.basis * eig.vectors.leftCols(n);
  const auto pos = omega_star.positions(mesh.num_elements());
  Matrix out(3 * omega.size(), n);
  int p = 0;
  for (int e : omega) {
    out.middleRows<3>(dof(p, 0)) = phi.middleRows<3>(dof(pos[e], 0));
    ++p;
  }
  return out;
}

LocalSpectralData solve_local(const TriMesh& mesh, const Coefficient& nu, const Source& f,
                              const PartitionOfUnity& pou, const Decomposition& dec, int j, double gamma0_sq) {
  const Subdomain& sub = dec.subdomains.at(j);
  const LocalSystem sys(mesh, nu, sub.oversampling, gamma0_sq);
  LocalSpectralData out;
  out.index = j;
  out.interior = !touches_boundary(mesh, sub.oversampling);
  const Vector psi = sys.source_solution(assemble_load(mesh, f, sub.oversampling));
  out.particular = restrict_vector(mesh, psi, sub.oversampling, sub.omega);
  out.harmonic = sys.harmonic();
  const auto& chi = pou.chi.at(j);
  const std::span<const double> chi_span(chi.data(), chi.size());
  const EigenPencil pencil = eigen_pencil(mesh, nu, chi_span, sub.omega, sub.oversampling, gamma0_sq, out.harmonic);
  out.eig = solve_pencil(pencil, out.interior ? constant_coefficients(out.harmonic) : Vector());
  return out;
}

} // namespace msgfem
