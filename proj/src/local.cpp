#include "ecms/local.hpp"

#include <cmath>

namespace ecms {

LocalProblem::LocalProblem(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                           const Rect &rect, const std::string &context)
    : sd_(mesh.subdomain(rect)), K_(assemble_sesquilinear(mesh, coeff, rect, FormKind::primal)),
      lu_([&] {
        auto parts = partition(K_, sd_);
        K_free_fixed_ = std::move(parts.free_fixed);
        return SparseFactorization(parts.free_free, context);
      }()) {}

Vector LocalProblem::solve(const Vector &fixed_values, const Vector &load) const {
  Vector rhs(sd_.num_free());
  for (int p = 0; p < sd_.num_free(); ++p)
    rhs(p) = load(sd_.free_local[p]);
  if (sd_.num_fixed() > 0)
    rhs -= K_free_fixed_ * fixed_values;
  const Vector uf = lu_.solve(rhs);
  Vector out(sd_.rect.num_nodes());
  for (int p = 0; p < sd_.num_free(); ++p)
    out(sd_.free_local[p]) = uf(p);
  for (int q = 0; q < sd_.num_fixed(); ++q)
    out(sd_.fixed_local[q]) = fixed_values(q);
  return out;
}

Matrix LocalProblem::extend(const Matrix &traces) const {
  if (traces.rows() != sd_.num_fixed())
    throw NumericalError("trace size does not match the fixed nodes of the subdomain");
  const Matrix rhs = -(K_free_fixed_ * traces);
  Matrix out(sd_.rect.num_nodes(), traces.cols());
  for (Eigen::Index c = 0; c < traces.cols(); ++c) {
    const Vector uf = lu_.solve(Vector(rhs.col(c)));
    for (int p = 0; p < sd_.num_free(); ++p)
      out(sd_.free_local[p], c) = uf(p);
  }
  for (int q = 0; q < sd_.num_fixed(); ++q)
    out.row(sd_.fixed_local[q]) = traces.row(q);
  return out;
}

Vector harmonic_extension(const LocalProblem &lp, const Vector &trace) {
  return lp.solve(trace, Vector::Zero(lp.rect().num_nodes()));
}

Vector bubble_solve(const TwoLevelMesh &mesh, const LocalProblem &lp, const ScalarField &f) {
  return lp.solve(Vector::Zero(lp.subdomain().num_fixed()), assemble_load(mesh, lp.rect(), f));
}

Vector oversampling_bubble(const TwoLevelMesh &mesh, const LocalProblem &patch,
                           const ScalarField &f) {
  return bubble_solve(mesh, patch, f);
}

Vector particular_solve(const TwoLevelMesh &mesh, const LocalProblem &lp, const SourceTerms &src) {
  const Rect &rect = lp.rect();
  const Vector load = assemble_load(mesh, rect, src.f) + assemble_boundary_load(mesh, rect, src.g);
  const Vector data = dirichlet_values(mesh, rect, src.dirichlet);
  const Subdomain &sd = lp.subdomain();
  Vector fixed(sd.num_fixed());
  for (int q = 0; q < sd.num_fixed(); ++q)
    fixed(q) = data(sd.fixed_local[q]);
  return lp.solve(fixed, load);
}

namespace {

template <class Build>
std::vector<LocalProblem> build_all(int count, Execution exec, Build &&build) {
  std::vector<std::optional<LocalProblem>> slots(count);
  for_each_index(exec, count, [&](int i) { slots[i].emplace(build(i)); });
  std::vector<LocalProblem> out;
  out.reserve(count);
  for (auto &s : slots)
    out.push_back(std::move(*s));
  return out;
}

} // namespace

ElementSolvers::ElementSolvers(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                               Execution exec)
    : problems_(build_all(static_cast<int>(mesh.elements.size()), exec, [&](int t) {
        return LocalProblem(mesh, coeff, mesh.elements[t].rect,
                            "element " + std::to_string(t) + " local problem");
      })) {}

PatchSolvers::PatchSolvers(const TwoLevelMesh &mesh, const CoefficientField &coeff, Execution exec)
    : problems_(build_all(static_cast<int>(mesh.edges.size()), exec, [&](int e) {
        return LocalProblem(mesh, coeff, oversampling_domain(mesh, e).rect,
                            "oversampling patch of edge " + std::to_string(e));
      })) {}

void scatter(const Subdomain &sd, const Vector &local, Vector &global) {
  for (std::size_t l = 0; l < sd.nodes.size(); ++l)
    global(sd.nodes[l]) = local(static_cast<Eigen::Index>(l));
}

Vector gather_fixed(const Subdomain &sd, const Vector &global) {
  Vector out(sd.num_fixed());
  for (int q = 0; q < sd.num_fixed(); ++q)
    out(q) = global(sd.nodes[sd.fixed_local[q]]);
  return out;
}

namespace {

template <class PerElement>
Vector glue_elements(const TwoLevelMesh &mesh, const ElementSolvers &elements, Execution exec,
                     PerElement &&solve) {
  std::vector<Vector> parts(elements.size());
  for_each_index(exec, elements.size(), [&](int t) { parts[t] = solve(t); });
  Vector out = Vector::Zero(mesh.num_fine_nodes());
  for (int t = 0; t < elements.size(); ++t)
    scatter(elements[t].subdomain(), parts[t], out);
  return out;
}

} // namespace

Vector extend_skeleton(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                       const Vector &skeleton_values, Execution exec) {
  return glue_elements(mesh, elements, exec, [&](int t) {
    return harmonic_extension(elements[t], gather_fixed(elements[t].subdomain(), skeleton_values));
  });
}

Vector bubble_part(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                   const SourceTerms &src, Execution exec) {
  return glue_elements(mesh, elements, exec,
                       [&](int t) { return particular_solve(mesh, elements[t], src); });
}

Vector edge_residue(const TwoLevelMesh &mesh, int edge, const Subdomain &patch,
                    const Vector &patch_values) {
  const auto nodes = mesh.edge_fine_nodes(edge);
  const int r = mesh.spec.refine;
  auto value_at = [&](int id) {
    const int l = patch.rect.local(mesh.node_i(id), mesh.node_j(id));
    return patch_values(l);
  };
  const Complex v0 = mesh.is_interior_coarse_node(nodes.front()) ? value_at(nodes.front()) : 0.0;
  const Complex v1 = mesh.is_interior_coarse_node(nodes.back()) ? value_at(nodes.back()) : 0.0;
  std::vector<Complex> out;
  for (int t = 0; t <= r; ++t) {
    const int id = nodes[t];
    if (mesh.is_interior_coarse_node(id) || mesh.tags[id] == NodeTag::dirichlet)
      continue;
    const double s = static_cast<double>(t) / r;
    out.push_back(value_at(id) - ((1.0 - s) * v0 + s * v1));
  }
  return Eigen::Map<Vector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

Vector build_u_s(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                 const ElementSolvers &elements, const PatchSolvers *patches,
                 const SourceTerms &src, Execution exec) {
  const int num_edges = static_cast<int>(mesh.edges.size());
  std::vector<Vector> residues(num_edges);
  for_each_index(exec, num_edges, [&](int e) {
    if (patches) {
      const LocalProblem &patch = (*patches)[e];
      residues[e] = edge_residue(mesh, e, patch.subdomain(), particular_solve(mesh, patch, src));
    } else {
      const LocalProblem patch(mesh, coeff, oversampling_domain(mesh, e).rect,
                               "oversampling patch of edge " + std::to_string(e));
      residues[e] = edge_residue(mesh, e, patch.subdomain(), particular_solve(mesh, patch, src));
    }
  });
  Vector skeleton = Vector::Zero(mesh.num_fine_nodes());
  for (int e = 0; e < num_edges; ++e) {
    const auto dofs = mesh.edge_dofs(e);
    for (std::size_t d = 0; d < dofs.size(); ++d)
      skeleton(dofs[d]) = residues[e](static_cast<Eigen::Index>(d));
  }
  return extend_skeleton(mesh, elements, skeleton, exec);
}

Decomposition decompose(const TwoLevelMesh &mesh, const ElementSolvers &elements, const Vector &u,
                        const SourceTerms &src, Execution exec) {
  Vector skeleton = u;
  for (int id = 0; id < mesh.num_fine_nodes(); ++id)
    if (mesh.tags[id] == NodeTag::dirichlet)
      skeleton(id) = 0.0;
  Decomposition d;
  d.harmonic = extend_skeleton(mesh, elements, skeleton, exec);
  d.bubble = bubble_part(mesh, elements, src, exec);
  return d;
}

MeshAssumption check_mesh_assumption(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                     double C_P) {
  MeshAssumption out;
  out.H = mesh.spec.H();
  const double denom = std::sqrt(2.0) * C_P * coeff.V_max() * coeff.k;
  out.bound = denom > 0.0 ? std::sqrt(coeff.A_min()) / denom : std::numeric_limits<double>::infinity();
  out.satisfied = out.H <= out.bound;
  return out;
}

} // namespace ecms
