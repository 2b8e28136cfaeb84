#include "ecms/basis.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace ecms {

Vector BasisFunction::to_global(int num_fine_nodes) const {
  Vector out = Vector::Zero(num_fine_nodes);
  for (std::size_t l = 0; l < nodes.size(); ++l)
    out(nodes[l]) = values(static_cast<Eigen::Index>(l));
  return out;
}

namespace {

// Collects rect-local pieces from several elements into one sorted support.
// Shared skeleton nodes carry the same value from every side.
BasisFunction glue(const std::vector<std::pair<const Subdomain *, Vector>> &pieces) {
  std::vector<std::pair<int, Complex>> entries;
  for (const auto &[sd, values] : pieces)
    for (std::size_t l = 0; l < sd->nodes.size(); ++l)
      entries.emplace_back(sd->nodes[l], values(static_cast<Eigen::Index>(l)));
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto &a, const auto &b) { return a.first < b.first; });
  BasisFunction f;
  std::vector<Complex> values;
  for (const auto &[id, v] : entries) {
    if (!f.nodes.empty() && f.nodes.back() == id)
      continue;
    f.nodes.push_back(id);
    values.push_back(v);
  }
  f.values = Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
  return f;
}

} // namespace

NodalBasis build_nodal_basis(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                             Execution exec) {
  const int nH = mesh.spec.nH;
  const int r = mesh.spec.refine;
  NodalBasis out;
  out.functions.resize(mesh.coarse_nodes.size());
  for_each_index(exec, static_cast<int>(mesh.coarse_nodes.size()), [&](int c) {
    const int id = mesh.coarse_nodes[c];
    const int xi = mesh.node_i(id), xj = mesh.node_j(id);
    const int ci = xi / r, cj = xj / r;
    std::vector<std::pair<const Subdomain *, Vector>> pieces;
    for (int dj = -1; dj <= 0; ++dj) {
      for (int di = -1; di <= 0; ++di) {
        const int t = (cj + dj) * nH + (ci + di);
        const Subdomain &sd = elements[t].subdomain();
        // Restricted to the element boundary, the bilinear coarse hat is the
        // piecewise linear tent.
        Vector trace(sd.num_fixed());
        for (int q = 0; q < sd.num_fixed(); ++q) {
          const int g = sd.nodes[sd.fixed_local[q]];
          const double wx = 1.0 - std::abs(mesh.node_i(g) - xi) / static_cast<double>(r);
          const double wy = 1.0 - std::abs(mesh.node_j(g) - xj) / static_cast<double>(r);
          trace(q) = std::max(wx, 0.0) * std::max(wy, 0.0);
        }
        pieces.emplace_back(&sd, harmonic_extension(elements[t], trace));
      }
    }
    out.functions[c] = glue(pieces);
  });
  return out;
}

EdgeExtension extend_edge_unit_vectors(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                                       int edge) {
  const auto dofs = mesh.edge_dofs(edge);
  EdgeExtension ext;
  for (int t : mesh.edges.at(edge).elements) {
    const Subdomain &sd = elements[t].subdomain();
    Matrix traces = Matrix::Zero(sd.num_fixed(), static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t d = 0; d < dofs.size(); ++d) {
      const int l = sd.rect.local(mesh.node_i(dofs[d]), mesh.node_j(dofs[d]));
      const int q = sd.local_to_fixed[l];
      if (q < 0)
        throw NumericalError("edge dof is not a fixed node of its element");
      traces(q, static_cast<Eigen::Index>(d)) = 1.0;
    }
    ext.elements.push_back(t);
    ext.functions.push_back(elements[t].extend(traces));
  }
  return ext;
}

RestrictionDiscretization build_restriction(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                            const LocalProblem &patch,
                                            const ElementSolvers &elements, int edge,
                                            bool keep_extension, EdgeExtension *edge_ext) {
  RestrictionDiscretization rd;
  rd.edge = edge;
  rd.edge_dofs = mesh.edge_dofs(edge);
  const Subdomain &sd = patch.subdomain();

  std::vector<int> trace_q;
  for (int q = 0; q < sd.num_fixed(); ++q) {
    const int g = sd.nodes[sd.fixed_local[q]];
    if (mesh.tags[g] != NodeTag::dirichlet) {
      trace_q.push_back(q);
      rd.trace_nodes.push_back(g);
    }
  }
  const auto ntrace = static_cast<Eigen::Index>(trace_q.size());
  Matrix traces = Matrix::Zero(sd.num_fixed(), ntrace);
  for (Eigen::Index p = 0; p < ntrace; ++p)
    traces(trace_q[p], p) = 1.0;
  Matrix E = patch.extend(traces);

  const SparseMatrix G = assemble_energy_gram(mesh, coeff, sd.rect);
  rd.A_gram = E.adjoint() * (G * E);
  rd.A_gram = 0.5 * (rd.A_gram + rd.A_gram.adjoint());

  const auto nodes = mesh.edge_fine_nodes(edge);
  const int r = mesh.spec.refine;
  auto row_of = [&](int id) { return sd.rect.local(mesh.node_i(id), mesh.node_j(id)); };
  const bool first_coarse = mesh.is_interior_coarse_node(nodes.front());
  const bool last_coarse = mesh.is_interior_coarse_node(nodes.back());
  rd.R.resize(static_cast<Eigen::Index>(rd.edge_dofs.size()), ntrace);
  Eigen::Index row = 0;
  for (int t = 0; t <= r; ++t) {
    const int id = nodes[t];
    if (mesh.is_interior_coarse_node(id) || mesh.tags[id] == NodeTag::dirichlet)
      continue;
    const double s = static_cast<double>(t) / r;
    rd.R.row(row) = E.row(row_of(id));
    if (first_coarse)
      rd.R.row(row) -= (1.0 - s) * E.row(row_of(nodes.front()));
    if (last_coarse)
      rd.R.row(row) -= s * E.row(row_of(nodes.back()));
    ++row;
  }

  EdgeExtension ext = extend_edge_unit_vectors(mesh, elements, edge);
  rd.B_gram = Matrix::Zero(rd.R.rows(), rd.R.rows());
  for (std::size_t a = 0; a < ext.elements.size(); ++a) {
    const SparseMatrix Gt = assemble_energy_gram(mesh, coeff, elements[ext.elements[a]].rect());
    rd.B_gram += ext.functions[a].adjoint() * (Gt * ext.functions[a]);
  }
  rd.B_gram = 0.5 * (rd.B_gram + rd.B_gram.adjoint());
  if (edge_ext)
    *edge_ext = std::move(ext);
  if (keep_extension)
    rd.extension = std::move(E);
  return rd;
}

Complex normalize_phase(Vector &v) {
  if (v.size() == 0)
    return 1.0;
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const double mag = std::abs(v(imax));
  if (mag == 0.0)
    return 1.0;
  const Complex phase = std::conj(v(imax)) / mag;
  v *= phase;
  v(imax) = Complex(v(imax).real(), 0.0);
  return phase;
}

EdgeBasis edge_svd(const RestrictionDiscretization &rd, int m) {
  if (m < 0)
    throw NumericalError("negative number of edge basis functions");
  EdgeBasis out;
  out.edge = rd.edge;
  const auto ndofs = rd.R.rows();
  const auto ntrace = rd.R.cols();
  const int available = static_cast<int>(std::min(ndofs, ntrace));
  if (available == 0) {
    out.vectors.resize(ndofs, 0);
    out.truncated = m > 0;
    return out;
  }
  HermitianGEVP problem;
  problem.M = rd.R.adjoint() * rd.B_gram * rd.R;
  problem.M = 0.5 * (problem.M + problem.M.adjoint());
  problem.G = rd.A_gram;
  const EigenPairs pairs = top_eigenpairs(problem, available);
  out.regularized = pairs.regularized;
  out.singular_values = pairs.values.cwiseMax(0.0).cwiseSqrt();

  const double lead = out.singular_values(0);
  int usable = 0;
  while (usable < std::min(m, available) &&
         out.singular_values(usable) > kSingularValueFloor * lead && lead > 0.0)
    ++usable;
  out.truncated = usable < m;

  out.vectors.resize(ndofs, usable);
  for (int j = 0; j < usable; ++j) {
    Vector v = rd.R * pairs.vectors.col(j);
    // Two passes of B-orthogonalization against the earlier vectors.
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < j; ++i) {
        const Complex c = out.vectors.col(i).dot(rd.B_gram * v);
        v -= c * out.vectors.col(i);
      }
    const double bnorm = std::sqrt(std::max(0.0, (v.dot(rd.B_gram * v)).real()));
    if (!(bnorm > 0.0))
      throw NumericalError("edge " + std::to_string(rd.edge) + ": degenerate singular vector");
    v /= bnorm;
    normalize_phase(v);
    out.vectors.col(j) = v;
  }
  return out;
}

void attach_edge_functions(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                           EdgeBasis &basis, const EdgeExtension *ext) {
  EdgeExtension local;
  if (!ext) {
    local = extend_edge_unit_vectors(mesh, elements, basis.edge);
    ext = &local;
  }
  basis.functions.clear();
  for (Eigen::Index j = 0; j < basis.vectors.cols(); ++j) {
    std::vector<std::pair<const Subdomain *, Vector>> pieces;
    for (std::size_t a = 0; a < ext->elements.size(); ++a)
      pieces.emplace_back(&elements[ext->elements[a]].subdomain(),
                          ext->functions[a] * basis.vectors.col(j));
    basis.functions.push_back(glue(pieces));
  }
}

EdgeBasisSet build_edge_bases(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                              const ElementSolvers &elements, const PatchSolvers *patches, int m,
                              Execution exec) {
  EdgeBasisSet set;
  set.m = m;
  set.edges.resize(mesh.edges.size());
  for_each_index(exec, static_cast<int>(mesh.edges.size()), [&](int e) {
    std::optional<LocalProblem> own;
    const LocalProblem *patch = nullptr;
    if (patches) {
      patch = &(*patches)[e];
    } else {
      own.emplace(mesh, coeff, oversampling_domain(mesh, e).rect,
                  "oversampling patch of edge " + std::to_string(e));
      patch = &*own;
    }
    EdgeExtension ext;
    const auto rd = build_restriction(mesh, coeff, *patch, elements, e, false, &ext);
    EdgeBasis basis = edge_svd(rd, m);
    attach_edge_functions(mesh, elements, basis, &ext);
    set.edges[e] = std::move(basis);
  });
  return set;
}

TrialSpace assemble_trial_space(const TwoLevelMesh &mesh, const NodalBasis &nodal,
                                const EdgeBasisSet &edges, int m) {
  TrialSpace ts;
  std::vector<Triplet> triplets;
  int col = 0;
  auto add = [&](const BasisFunction &f, int edge, int rank) {
    for (std::size_t l = 0; l < f.nodes.size(); ++l) {
      const Complex v = f.values(static_cast<Eigen::Index>(l));
      if (v != 0.0)
        triplets.emplace_back(f.nodes[l], col, v);
    }
    ts.column_edge.push_back(edge);
    ts.column_rank.push_back(rank);
    ++col;
  };
  for (std::size_t c = 0; c < nodal.functions.size(); ++c)
    add(nodal.functions[c], -1, static_cast<int>(c));
  ts.num_nodal = col;
  for (const auto &basis : edges.edges) {
    const int count = std::min<int>(m, static_cast<int>(basis.functions.size()));
    for (int j = 0; j < count; ++j)
      add(basis.functions[j], basis.edge, j);
  }
  ts.Phi.resize(mesh.num_fine_nodes(), col);
  ts.Phi.setFromTriplets(triplets.begin(), triplets.end());
  ts.Phi.makeCompressed();
  return ts;
}

} // namespace ecms
