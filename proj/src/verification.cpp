#include "msgfem/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <json.hpp>

#include "msgfem/error.hpp"
#include "msgfem/quadrature.hpp"
#include "msgfem/random.hpp"

namespace msgfem {

namespace {

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

using Segment = std::array<int, 2>;

/// Edges of D adjacent to an element outside D (boundary faces of the mesh excluded).
std::vector<Segment> inner_boundary(const TriMesh& mesh, const ElementSet& D) {
  std::vector<Segment> out;
  for (const auto& f : mesh.interior_faces())
    if (D.contains(f.element_a) != D.contains(f.element_b))
      out.push_back(f.vertices);
  return out;
}

/// All boundary edges of D, including those on the mesh boundary.
std::vector<Segment> full_boundary(const TriMesh& mesh, const ElementSet& D) {
  std::vector<Segment> out = inner_boundary(mesh, D);
  for (const auto& f : mesh.boundary_faces())
    if (D.contains(f.element))
      out.push_back(f.vertices);
  return out;
}

Vector random_vector(Rng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

} // namespace

Vector fine_solve(const TriMesh& mesh, const Coefficient& nu, const Source& f, double gamma0_sq) {
  const ElementSet everything = ElementSet::all(mesh);
  const SparseMatrix B = assemble_B(mesh, nu, everything, gamma0_sq).matrix;
  const Vector F = assemble_load(mesh, f, everything);
  Eigen::SimplicialLDLT<SparseMatrix> solver(B);
  if (solver.info() != Eigen::Success)
    throw NumericalError("global DG system could not be factorised; gamma0^2 = " + fmt(gamma0_sq) +
                         " may be below the coercivity threshold");
  Vector u = solver.solve(F);
  const double fn = F.norm();
  if (fn > 0.0) {
    // Normwise backward error; the residual relative to |F| alone bottoms out near 1e-9 at high contrast.
    const double bnorm = (B.cwiseAbs() * Vector::Ones(B.cols())).maxCoeff();
    u += solver.solve(F - B * u);
    const double res = (B * u - F).norm() / (bnorm * u.norm() + fn);
    if (!(res <= 1e-10))
      throw NumericalError("global DG solve residual " + fmt(res) + "; gamma0^2 = " + fmt(gamma0_sq) +
                           " may be below the coercivity threshold");
  }
  return u;
}

bool is_coercive(const SparseMatrix& B) {
  Eigen::SimplicialLDLT<SparseMatrix> solver(B);
  return solver.info() == Eigen::Success && solver.vectorD().minCoeff() > 0.0;
}

CoercivityInterval coercivity_interval(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq) {
  const ElementSet everything = ElementSet::all(mesh);
  const Matrix B = Matrix(assemble_B(mesh, nu, everything, gamma0_sq).matrix);
  const Matrix Bp = Matrix(assemble_Bplus(mesh, nu, everything, gamma0_sq).matrix);
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(B, Bp, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success)
    throw NumericalError("coercivity eigenproblem failed");
  const auto& ev = ges.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

double observed_rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

double jump_seminorm(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq, const Vector& u) {
  FormTerms t;
  t.interior_penalty = true;
  t.boundary_penalty = 1.0;
  return form_norm(assemble_form(mesh, nu, ElementSet::all(mesh), gamma0_sq, t).matrix, u);
}

Vector elementwise_l2_projection(const TriMesh& mesh, const Source& f) {
  Vector out(3 * mesh.num_elements());
  Eigen::Matrix3d ref;
  ref << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  const Eigen::Matrix3d ref_inv = ref.inverse();
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto& el = mesh.element(e);
    const Point p0 = mesh.vertex(el[0]), p1 = mesh.vertex(el[1]), p2 = mesh.vertex(el[2]);
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (const auto& q : dunavant5) {
      const double fx = f(q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2) * q.weight;
      for (int k = 0; k < 3; ++k)
        b[k] += fx * q.bary[k];
    }
    // Local mass is area / 12 * ref, load is area * b.
    out.segment<3>(dof(e, 0)) = 12.0 * ref_inv * b;
  }
  return out;
}

ConvergenceRecord manufactured_convergence(std::span<const int> levels, double gamma0_sq) {
  using std::numbers::pi;
  const Source f = [](const Point& x) { return 2.0 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  auto exact = [](const Point& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  auto exact_grad = [](const Point& x) {
    return Point(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()), pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };

  ConvergenceRecord rec;
  for (int n : levels) {
    const TriMesh mesh = build_structured_mesh(n);
    const Coefficient nu(std::vector<double>(mesh.num_elements(), 1.0));
    const Vector u = fine_solve(mesh, nu, f, gamma0_sq);
    double l2 = 0.0, grad = 0.0;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto& el = mesh.element(e);
      const Point p0 = mesh.vertex(el[0]), p1 = mesh.vertex(el[1]), p2 = mesh.vertex(el[2]);
      const auto g = barycentric_gradients(mesh, e);
      const Point gh = u[dof(e, 0)] * g[0] + u[dof(e, 1)] * g[1] + u[dof(e, 2)] * g[2];
      for (const auto& q : dunavant5) {
        const Point x = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
        const double uh = q.bary[0] * u[dof(e, 0)] + q.bary[1] * u[dof(e, 1)] + q.bary[2] * u[dof(e, 2)];
        const double w = q.weight * mesh.area(e);
        l2 += w * std::pow(exact(x) - uh, 2);
        grad += w * (exact_grad(x) - gh).squaredNorm();
      }
    }
    // The exact solution is continuous and vanishes on the boundary, so its jumps are zero.
    const double jumps = jump_seminorm(mesh, nu, gamma0_sq, u);
    rec.h.push_back(mesh.max_diameter());
    rec.l2_error.push_back(std::sqrt(l2));
    rec.energy_error.push_back(std::sqrt(grad + jumps * jumps));
  }
  for (std::size_t i = 0; i + 1 < rec.h.size(); ++i) {
    rec.l2_rate.push_back(observed_rate(rec.l2_error[i], rec.l2_error[i + 1], rec.h[i], rec.h[i + 1]));
    rec.energy_rate.push_back(observed_rate(rec.energy_error[i], rec.energy_error[i + 1], rec.h[i], rec.h[i + 1]));
  }
  return rec;
}

DecayFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("linear fit needs two equally long sequences of at least 2 values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0))
    throw InvalidArgument("linear fit needs at least two distinct abscissae");
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    ss_res += std::pow(y[i] - (fit.intercept + fit.slope * x[i]), 2);
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

DecayFit decay_fit(std::span<const double> values, double exponent) {
  if (values.size() < 5)
    throw InvalidArgument("decay fit needs at least 5 values, got " + std::to_string(values.size()));
  std::vector<double> x, y;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw InvalidArgument("decay fit needs positive finite values");
    x.push_back(std::pow(static_cast<double>(i + 1), exponent));
    y.push_back(std::log(values[i]));
  }
  return linear_fit(x, y);
}

double boundary_distance(const TriMesh& mesh, const ElementSet& omega, const ElementSet& omega_star) {
  const auto outer = inner_boundary(mesh, omega_star);
  if (outer.empty())
    return std::numeric_limits<double>::infinity();
  const auto own = full_boundary(mesh, omega);
  double best = std::numeric_limits<double>::infinity();
  // Polygon-to-segment distance is attained at an endpoint of one of the segments.
  for (const auto& s : outer) {
    const Point a = mesh.vertex(s[0]), b = mesh.vertex(s[1]);
    for (const auto& t : own) {
      const Point c = mesh.vertex(t[0]), d = mesh.vertex(t[1]);
      best = std::min({best, point_segment_distance(c, a, b), point_segment_distance(d, a, b),
                       point_segment_distance(a, c, d), point_segment_distance(b, c, d)});
    }
  }
  return best;
}

double annulus_max_diameter(const TriMesh& mesh, const ElementSet& omega, const ElementSet& omega_star) {
  double h = 0.0;
  for (int e : set_difference(omega_star, omega))
    h = std::max(h, mesh.diameter(e));
  return h;
}

CaccioppoliResult caccioppoli_ratio(const TriMesh& mesh, const Coefficient& nu, const ElementSet& omega,
                                    const ElementSet& omega_star, double gamma0_sq, int samples,
                                    std::uint64_t seed) {
  CaccioppoliResult out;
  out.delta = boundary_distance(mesh, omega, omega_star);
  out.h_max = annulus_max_diameter(mesh, omega, omega_star);
  out.mesh_condition = out.delta > 3.0 * out.h_max;
  const ElementSet annulus = set_difference(omega_star, omega);
  if (annulus.empty())
    throw InvalidArgument("Caccioppoli ratio needs omega strictly inside omega*");
  if (std::isinf(out.delta))
    throw InvalidArgument("Caccioppoli ratio needs omega* to have an inner boundary");

  const HarmonicBasis hb = harmonic_basis(mesh, nu, omega_star, gamma0_sq);
  const SparseMatrix Bp = assemble_Bplus(mesh, nu, omega, gamma0_sq).matrix;
  const SparseMatrix mass = assemble_mass(mesh, annulus).matrix;
  const double scale = std::sqrt(nu.max());
  Rng rng(seed);
  for (int s = 0; s < samples; ++s) {
    const Vector u = hb.basis * random_vector(rng, hb.basis.cols());
    const double interior = form_norm(Bp, restrict_vector(mesh, u, omega_star, omega));
    const double ring = form_norm(mass, restrict_vector(mesh, u, omega_star, annulus));
    out.max_ratio = std::max(out.max_ratio, interior * out.delta / (scale * ring));
    ++out.samples;
  }
  return out;
}

double interpolation_stability(const TriMesh& mesh, const Coefficient& nu, std::span<const double> chi,
                               const ElementSet& omega, double gamma0_sq, int samples, std::uint64_t seed) {
  const SparseMatrix H = assemble_H(mesh, nu, omega, gamma0_sq).matrix;
  const double g = gradient_sup(mesh, chi, omega);
  const double factor = std::sqrt(1.0 + g * g);
  Rng rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vector u = random_vector(rng, 3 * omega.size());
    const Vector iu = interpolate_product(mesh, chi, omega, u);
    worst = std::max(worst, form_norm(H, iu) / (factor * form_norm(H, u)));
  }
  return worst;
}

bool PropertyReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* PropertyReport::first_failure() const {
  for (const auto& c : checks)
    if (!c.passed)
      return &c;
  return nullptr;
}

std::string PropertyReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks)
    os << (c.passed ? "PASS " : "FAIL ") << c.module << '/' << c.name << ": " << c.witness << '\n';
  return os.str();
}

std::string PropertyReport::to_json() const {
  nlohmann::json j;
  j["passed"] = all_passed();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks)
    j["checks"].push_back({{"name", c.name}, {"module", c.module}, {"status", c.passed ? "pass" : "fail"},
                           {"witness", c.witness}});
  if (const auto* f = first_failure())
    j["first_failure"] = f->module + "/" + f->name;
  return j.dump(2) + "\n";
}

PropertyReport run_property_suite(const SuiteConfig& config) {
  PropertyReport report;
  auto add = [&](std::string module, std::string name, bool ok, std::string witness) {
    report.checks.push_back({std::move(name), std::move(module), ok, std::move(witness)});
  };
  auto guarded = [&](const std::string& module, const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& ex) {
      add(module, name, false, std::string("exception: ") + ex.what());
    }
  };

  const TriMesh mesh = build_structured_mesh(config.mesh_n);
  const Coefficient nu = coefficient_field(config.coefficient, mesh);
  const ElementSet everything = ElementSet::all(mesh);
  const double g0 = config.gamma0_sq;

  Decomposition dec;
  try {
    dec = build_decomposition(mesh, config.grid_m, config.overlap, config.oversampling);
  } catch (const InvalidArgument& ex) {
    add("decomposition", "build", false, ex.what());
    return report;
  }

  {
    ElementSet cover, inner_cover;
    bool nested = true;
    for (const auto& s : dec.subdomains) {
      cover = set_union(cover, s.omega);
      inner_cover = set_union(inner_cover, d_minus(mesh, s.omega));
      nested = nested && s.omega.is_subset_of(s.oversampling);
    }
    add("decomposition", "cover", cover == everything && inner_cover == everything && nested,
        "union size " + std::to_string(cover.size()) + ", shrunk union size " + std::to_string(inner_cover.size()) +
            " of " + std::to_string(mesh.num_elements()) + (nested ? "" : ", omega not inside omega*"));
  }

  PartitionOfUnity pou;
  try {
    pou = build_pou(mesh, dec);
    double sum_err = 0.0, lo = 1.0, hi = 0.0, support = 0.0;
    for (int v = 0; v < mesh.num_vertices(); ++v) {
      double s = 0.0;
      for (const auto& chi : pou.chi) {
        s += chi[v];
        lo = std::min(lo, chi[v]);
        hi = std::max(hi, chi[v]);
      }
      sum_err = std::max(sum_err, std::abs(s - 1.0));
    }
    for (int j = 0; j < dec.size(); ++j) {
      const ElementSet inner = d_minus(mesh, dec.subdomains[j].omega);
      for (int e = 0; e < mesh.num_elements(); ++e)
        if (!inner.contains(e))
          for (int v : mesh.element(e))
            support = std::max(support, std::abs(pou.chi[j][v]));
    }
    add("space_ops", "pou_partition", sum_err <= 1e-14 && lo >= 0.0 && hi <= 1.0,
        "max |sum chi - 1| = " + fmt(sum_err) + ", range [" + fmt(lo) + ", " + fmt(hi) + "]");
    add("space_ops", "pou_support", support == 0.0, "max |chi_j| outside omega_j^- = " + fmt(support));
  } catch (const std::exception& ex) {
    add("space_ops", "pou_partition", false, ex.what());
    return report;
  }

  const SparseMatrix B = assemble_B(mesh, nu, everything, g0).matrix;
  const bool coercive = is_coercive(B);
  add("dg_forms", "coercivity", coercive,
      coercive ? "global B positive definite" : "global B has a nonpositive pivot: gamma0^2 = " + fmt(g0) + " too small");

  guarded("dg_forms", "kernel", [&] {
    double worst_interior = 0.0, min_boundary = std::numeric_limits<double>::infinity();
    for (const auto& s : dec.subdomains) {
      for (const ElementSet* D : {&s.omega, &s.oversampling}) {
        const SparseMatrix Bp = assemble_Bplus(mesh, nu, *D, g0).matrix;
        const Vector one = Vector::Ones(Bp.rows());
        if (touches_boundary(mesh, *D)) {
          min_boundary = std::min(min_boundary, one.dot(Bp * one));
        } else {
          const double scale = (Bp.cwiseAbs() * one).maxCoeff();
          worst_interior = std::max(worst_interior, (Bp * one).cwiseAbs().maxCoeff() / scale);
        }
      }
    }
    add("dg_forms", "kernel", worst_interior <= 1e-12 && min_boundary > 0.0,
        "interior max |B+ 1| / |B+| = " + fmt(worst_interior) + ", boundary min 1'B+1 = " + fmt(min_boundary));
  });

  // Nested pairs for the framework identities.
  std::vector<std::pair<ElementSet, ElementSet>> pairs;
  for (const auto& s : dec.subdomains) {
    pairs.emplace_back(s.omega, s.oversampling);
    pairs.emplace_back(s.oversampling, everything);
  }
  const int per_pair = std::max(1, (config.samples + static_cast<int>(pairs.size()) - 1) / static_cast<int>(pairs.size()));

  guarded("space_ops", "extension", [&] {
    Rng rng(config.seed);
    double iso = 0.0, restr = 0.0, locality = 0.0;
    bool identity = true;
    int count = 0;
    for (const auto& [D, Ds] : pairs) {
      const SparseMatrix H_d = assemble_H(mesh, nu, D, g0).matrix;
      const SparseMatrix H_ds = assemble_H(mesh, nu, Ds, g0).matrix;
      const SparseMatrix B_d = assemble_B(mesh, nu, D, g0).matrix;
      const SparseMatrix B_ds = assemble_B(mesh, nu, Ds, g0).matrix;
      const SubspaceMask mask = h0_mask(mesh, D);
      for (int s = 0; s < per_pair; ++s, ++count) {
        Vector v = Vector::Zero(3 * D.size());
        for (int i : mask.dofs)
          v[i] = rng.uniform(-1.0, 1.0);
        const Vector ev = extend_by_zero(mesh, v, D, Ds);
        const double nv = v.dot(H_d * v);
        iso = std::max(iso, std::abs(ev.dot(H_ds * ev) - nv) / nv);
        identity = identity && restrict_vector(mesh, ev, Ds, D) == v;

        const Vector u = random_vector(rng, 3 * Ds.size());
        const Vector ru = restrict_vector(mesh, u, Ds, D);
        restr = std::max(restr, form_norm(H_d, ru) / form_norm(H_ds, u));

        const double lhs = v.dot(B_d * ru);
        const double rhs = ev.dot(B_ds * u);
        locality = std::max(locality, std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-300}));
      }
    }
    add("space_ops", "extension_isometry", iso <= 1e-12,
        "max relative |‖Ev‖² - ‖v‖²| = " + fmt(iso) + " over " + std::to_string(count) + " samples");
    add("space_ops", "restriction_nonexpansive", restr <= 1.0 + 1e-12, "max ‖Ru‖/‖u‖ = " + fmt(restr));
    add("space_ops", "restrict_extend_identity", identity, identity ? "R(E(v)) == v bitwise" : "mismatch");
    add("space_ops", "locality", locality <= 1e-12, "max relative difference " + fmt(locality));
  });

  guarded("space_ops", "pou_reproduction", [&] {
    Rng rng(config.seed + 3);
    double worst = 0.0;
    for (int s = 0; s < std::max(1, config.samples / 10); ++s) {
      const Vector u = random_vector(rng, 3 * mesh.num_elements());
      std::vector<Vector> parts;
      for (const auto& sub : dec.subdomains)
        parts.push_back(restrict_vector(mesh, u, everything, sub.omega));
      worst = std::max(worst, (pou_blend(mesh, dec, pou, parts) - u).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff());
    }
    add("space_ops", "pou_reproduction", worst <= 1e-12, "max relative |sum_j I_h(chi_j u) - u| = " + fmt(worst));
  });

  if (!coercive)
    return report;

  // Local checks on a boundary subdomain and, when present, an interior one.
  std::vector<int> probe{0};
  for (int j = 0; j < dec.size(); ++j)
    if (!touches_boundary(mesh, dec.subdomains[j].oversampling)) {
      probe.push_back(j);
      break;
    }
  const Source f = [](const Point&) { return 1.0; };
  for (int j : probe) {
    const std::string tag = "subdomain " + std::to_string(j);
    const auto& sub = dec.subdomains[j];
    guarded("local_problems", "harmonicity", [&] {
      const LocalSpectralData local = solve_local(mesh, nu, f, pou, dec, j, g0);
      const double res = harmonic_residual(mesh, nu, sub.oversampling, g0, local.harmonic.basis);
      std::string witness = tag + ": residual " + fmt(res);
      bool ok = res <= 1e-10;
      if (local.interior) {
        const Eigen::ColPivHouseholderQR<Matrix> qr(local.harmonic.basis);
        const Vector one = Vector::Ones(local.harmonic.basis.rows());
        const double fit = (local.harmonic.basis * qr.solve(one) - one).norm() / one.norm();
        ok = ok && fit <= 1e-10;
        witness += ", constant fit residual " + fmt(fit);
      }
      add("local_problems", "harmonicity", ok, witness);

      const auto& eig = local.eig;
      double min_finite = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = eig.kernel_dim; k < eig.values.size(); ++k)
        min_finite = std::min(min_finite, eig.values[k]);
      const bool kernel_ok = local.interior ? eig.kernel_dim == 1 : eig.kernel_dim == 0;
      add("local_problems", "eigen_pencil",
          min_finite >= -1e-10 && eig.max_residual <= 1e-10 && kernel_ok,
          tag + ": min finite lambda " + fmt(min_finite) + ", residual " + fmt(eig.max_residual) + ", kernel " +
              std::to_string(eig.kernel_dim));

      const auto& chi = pou.chi[j];
      const double stab = interpolation_stability(mesh, nu, std::span<const double>(chi.data(), chi.size()),
                                                  sub.omega, g0, config.samples, config.seed + 1);
      add("space_ops", "interpolation_stability", std::isfinite(stab) && stab > 0.0, tag + ": ratio " + fmt(stab));
    });
    // Undefined when omega* is the whole domain: there is no layer to carry harmonic data.
    if (sub.oversampling.size() == mesh.num_elements())
      continue;
    guarded("local_problems", "caccioppoli", [&] {
      const CaccioppoliResult c =
          caccioppoli_ratio(mesh, nu, sub.omega, sub.oversampling, g0, std::max(50, config.samples / 2), config.seed + 2);
      add("local_problems", "caccioppoli", std::isfinite(c.max_ratio),
          tag + ": max ratio " + fmt(c.max_ratio) + ", delta " + fmt(c.delta) + ", 3 h_max " + fmt(3 * c.h_max));
    });
  }
  return report;
}

} // namespace msgfem
