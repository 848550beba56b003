#include "msgfem/space_ops.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <string>

#include "msgfem/error.hpp"

namespace msgfem {

namespace {

constexpr int unreachable = std::numeric_limits<int>::max();

std::vector<std::vector<int>> vertex_neighbours(const TriMesh& mesh) {
  std::vector<std::set<int>> nb(mesh.num_vertices());
  for (const auto& el : mesh.elements())
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b)
          nb[el[a]].insert(el[b]);
  std::vector<std::vector<int>> out(nb.size());
  for (std::size_t v = 0; v < nb.size(); ++v)
    out[v].assign(nb[v].begin(), nb[v].end());
  return out;
}

/// Multi-source hop distance from the marked vertices.
std::vector<int> hop_distance(const std::vector<std::vector<int>>& nb, const std::vector<char>& source) {
  std::vector<int> dist(nb.size(), unreachable);
  std::deque<int> queue;
  for (std::size_t v = 0; v < nb.size(); ++v)
    if (source[v]) {
      dist[v] = 0;
      queue.push_back(static_cast<int>(v));
    }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : nb[v])
      if (dist[w] == unreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

void check_size(const Vector& u, const ElementSet& D, const char* what) {
  if (u.size() != 3 * D.size())
    throw InvalidArgument(std::string(what) + ": vector size does not match the subdomain dofs");
}

} // namespace

SubspaceMask h0_mask(const TriMesh& mesh, const ElementSet& D) {
  const ElementSet inner = d_minus(mesh, D);
  SubspaceMask mask;
  mask.active.assign(3 * D.size(), 0);
  int p = 0;
  for (int e : D) {
    if (inner.contains(e))
      for (int k = 0; k < 3; ++k) {
        mask.dofs.push_back(dof(p, k));
        mask.active[dof(p, k)] = 1;
      }
    ++p;
  }
  return mask;
}

Vector restrict_vector(const TriMesh& mesh, const Vector& u, const ElementSet& Dstar, const ElementSet& D) {
  check_size(u, Dstar, "restrict");
  if (!D.is_subset_of(Dstar))
    throw InvalidArgument("restrict: D is not contained in D*");
  const auto pos = Dstar.positions(mesh.num_elements());
  Vector out(3 * D.size());
  int p = 0;
  for (int e : D) {
    out.segment<3>(dof(p, 0)) = u.segment<3>(dof(pos[e], 0));
    ++p;
  }
  return out;
}

Vector extend_by_zero(const TriMesh& mesh, const Vector& v, const ElementSet& D, const ElementSet& Dstar) {
  check_size(v, D, "extend_by_zero");
  if (!D.is_subset_of(Dstar))
    throw InvalidArgument("extend_by_zero: D is not contained in D*");
  const ElementSet inner = d_minus(mesh, D);
  const auto pos = Dstar.positions(mesh.num_elements());
  Vector out = Vector::Zero(3 * Dstar.size());
  int p = 0;
  for (int e : D) {
    const auto block = v.segment<3>(dof(p, 0));
    if (inner.contains(e))
      out.segment<3>(dof(pos[e], 0)) = block;
    else if (block.cwiseAbs().maxCoeff() != 0.0)
      throw InvalidArgument("extend_by_zero: vector is nonzero on element " + std::to_string(e) +
                            " outside D^-, so it is not in H0(D)");
    ++p;
  }
  return out;
}

PartitionOfUnity build_pou(const TriMesh& mesh, const Decomposition& dec) {
  const int nv = mesh.num_vertices();
  const auto nb = vertex_neighbours(mesh);
  std::vector<Vector> raw;
  raw.reserve(dec.size());

  for (const auto& sub : dec.subdomains) {
    const ElementSet inner = d_minus(mesh, sub.omega);
    std::vector<char> in_inner(mesh.num_elements(), 0);
    for (int e : inner)
      in_inner[e] = 1;

    std::vector<char> outside(nv, 0), plateau(nv, 0);
    for (int v = 0; v < nv; ++v) {
      const auto elems = mesh.vertex_elements(v);
      outside[v] = !std::all_of(elems.begin(), elems.end(), [&](int t) { return in_inner[t] != 0; });
    }
    for (int e : sub.core)
      for (int v : mesh.element(e))
        if (!outside[v])
          plateau[v] = 1;

    const auto d0 = hop_distance(nb, outside);
    const auto d1 = hop_distance(nb, plateau);
    Vector w = Vector::Zero(nv);
    for (int v = 0; v < nv; ++v) {
      if (outside[v])
        continue;
      if (d0[v] == unreachable || d1[v] == unreachable)
        w[v] = 1.0;
      else
        w[v] = static_cast<double>(d0[v]) / static_cast<double>(d0[v] + d1[v]);
    }
    raw.push_back(std::move(w));
  }

  Vector total = Vector::Zero(nv);
  for (const auto& w : raw)
    total += w;
  for (int v = 0; v < nv; ++v)
    if (!(total[v] > 0.0))
      throw InvalidArgument("partition of unity: vertex " + std::to_string(v) + " at (" +
                            std::to_string(mesh.vertex(v).x()) + ", " + std::to_string(mesh.vertex(v).y()) +
                            ") is not interior to any shrunk subdomain");

  PartitionOfUnity pou;
  const ElementSet everything = ElementSet::all(mesh);
  for (auto& w : raw) {
    Vector chi = w.cwiseQuotient(total);
    pou.gradient_sup.push_back(gradient_sup(mesh, std::span<const double>(chi.data(), chi.size()), everything));
    pou.chi.push_back(std::move(chi));
  }
  return pou;
}

double gradient_sup(const TriMesh& mesh, std::span<const double> chi, const ElementSet& D) {
  double sup = 0.0;
  for (int e : D) {
    const auto g = barycentric_gradients(mesh, e);
    const auto& el = mesh.element(e);
    const Point grad = chi[el[0]] * g[0] + chi[el[1]] * g[1] + chi[el[2]] * g[2];
    sup = std::max(sup, grad.norm());
  }
  return sup;
}

Vector interpolate_product(const TriMesh& mesh, std::span<const double> chi, const ElementSet& omega,
                           const Vector& u) {
  check_size(u, omega, "interpolate_product");
  Vector out(u.size());
  int p = 0;
  for (int e : omega) {
    const auto& el = mesh.element(e);
    for (int k = 0; k < 3; ++k)
      out[dof(p, k)] = chi[el[k]] * u[dof(p, k)];
    ++p;
  }
  return out;
}

Vector pou_blend(const TriMesh& mesh, const Decomposition& dec, const PartitionOfUnity& pou,
                 std::span<const Vector> locals) {
  if (static_cast<int>(locals.size()) != dec.size() || pou.size() != dec.size())
    throw InvalidArgument("pou_blend: one local vector and one PoU member per subdomain required");
  const ElementSet everything = ElementSet::all(mesh);
  Vector out = Vector::Zero(3 * mesh.num_elements());
  for (int j = 0; j < dec.size(); ++j) {
    const auto& omega = dec.subdomains[j].omega;
    const auto& chi = pou.chi[j];
    const Vector local = interpolate_product(mesh, std::span<const double>(chi.data(), chi.size()), omega, locals[j]);
    out += extend_by_zero(mesh, local, omega, everything);
  }
  return out;
}

std::pair<double, double> locality_check(const TriMesh& mesh, const Coefficient& nu, double gamma0_sq,
                                         const Vector& u, const Vector& v, const ElementSet& D,
                                         const ElementSet& Dstar) {
  const Vector u_d = restrict_vector(mesh, u, Dstar, D);
  const Vector ev = extend_by_zero(mesh, v, D, Dstar);
  const SparseMatrix B_d = assemble_B(mesh, nu, D, gamma0_sq).matrix;
  const SparseMatrix B_ds = assemble_B(mesh, nu, Dstar, gamma0_sq).matrix;
  return {v.dot(B_d * u_d), ev.dot(B_ds * u)};
}

} // namespace msgfem
