#include "ecms/fem.hpp"

#include <algorithm>
#include <cmath>

#include "ecms/linalg.hpp"

namespace ecms {

namespace {

constexpr double kGauss2[2] = {0.5 - 0.5 / 1.7320508075688772, 0.5 + 0.5 / 1.7320508075688772};

// Q1 shape functions on [0,1]^2, counterclockwise from (0,0).
std::array<double, 4> q1_values(double s, double t) {
  return {(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t};
}

std::array<std::array<double, 2>, 4> q1_gradients(double s, double t) {
  return {{{-(1 - t), -(1 - s)}, {(1 - t), -s}, {t, s}, {-t, (1 - s)}}};
}

RealMatrix build_reference(bool stiffness) {
  RealMatrix E = RealMatrix::Zero(4, 4);
  for (double s : kGauss2) {
    for (double t : kGauss2) {
      const auto N = q1_values(s, t);
      const auto dN = q1_gradients(s, t);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          E(a, b) += 0.25 * (stiffness ? dN[a][0] * dN[b][0] + dN[a][1] * dN[b][1] : N[a] * N[b]);
    }
  }
  return E;
}

std::array<int, 4> cell_nodes(const Rect &rect, int i, int j) {
  return {rect.local(i, j), rect.local(i + 1, j), rect.local(i + 1, j + 1), rect.local(i, j + 1)};
}

// Calls fn(side, position, local node a, local node b, x_a, y_a, x_b, y_b) for
// every fine edge on a side of rect that lies on the domain boundary.
template <class Fn> void for_each_boundary_edge(const TwoLevelMesh &mesh, const Rect &rect, Fn &&fn) {
  const int n = mesh.n();
  if (rect.j0 == 0)
    for (int i = rect.i0; i < rect.i1; ++i)
      fn(Side::bottom, i, rect.local(i, 0), rect.local(i + 1, 0), mesh.x(i), 0.0, mesh.x(i + 1), 0.0);
  if (rect.j1 == n)
    for (int i = rect.i0; i < rect.i1; ++i)
      fn(Side::top, i, rect.local(i, n), rect.local(i + 1, n), mesh.x(i), 1.0, mesh.x(i + 1), 1.0);
  if (rect.i0 == 0)
    for (int j = rect.j0; j < rect.j1; ++j)
      fn(Side::left, j, rect.local(0, j), rect.local(0, j + 1), 0.0, mesh.x(j), 0.0, mesh.x(j + 1));
  if (rect.i1 == n)
    for (int j = rect.j0; j < rect.j1; ++j)
      fn(Side::right, j, rect.local(n, j), rect.local(n, j + 1), 1.0, mesh.x(j), 1.0, mesh.x(j + 1));
}

SparseMatrix volume_form(const TwoLevelMesh &mesh, const CoefficientField &coeff, const Rect &rect,
                         double stiffness_scale, double mass_scale, bool use_coefficients) {
  const RealMatrix &Ks = q1_reference_stiffness();
  const RealMatrix &Ms = q1_reference_mass();
  const double h = mesh.spec.h();
  const int n = mesh.n();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(16) * (rect.nodes_x() - 1) * (rect.nodes_y() - 1));
  for (int j = rect.j0; j < rect.j1; ++j) {
    for (int i = rect.i0; i < rect.i1; ++i) {
      const int cell = j * n + i;
      const double a = use_coefficients ? coeff.A[cell] : 1.0;
      const double v = use_coefficients ? coeff.V[cell] : 1.0;
      const double ks = stiffness_scale * a;
      const double ms = mass_scale * v * v * h * h;
      const auto nodes = cell_nodes(rect, i, j);
      for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
          trip.emplace_back(nodes[p], nodes[q], Complex(ks * Ks(p, q) + ms * Ms(p, q), 0.0));
    }
  }
  SparseMatrix K(rect.num_nodes(), rect.num_nodes());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

} // namespace

const RealMatrix &q1_reference_stiffness() {
  static const RealMatrix K = build_reference(true);
  return K;
}

const RealMatrix &q1_reference_mass() {
  static const RealMatrix M = build_reference(false);
  return M;
}

CoefficientField CoefficientField::constant(const TwoLevelMesh &mesh, double k, double A, double V,
                                            double beta) {
  CoefficientField c;
  c.k = k;
  const std::size_t cells = static_cast<std::size_t>(mesh.n()) * mesh.n();
  c.A.assign(cells, A);
  c.V.assign(cells, V);
  for (auto &b : c.beta)
    b.assign(mesh.n(), beta);
  return c;
}

double CoefficientField::A_min() const { return *std::min_element(A.begin(), A.end()); }
double CoefficientField::A_max() const { return *std::max_element(A.begin(), A.end()); }
double CoefficientField::V_min() const { return *std::min_element(V.begin(), V.end()); }
double CoefficientField::V_max() const { return *std::max_element(V.begin(), V.end()); }

SparseMatrix assemble_sesquilinear(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                   const Rect &rect, FormKind kind) {
  if (rect.nodes_x() < 2 || rect.nodes_y() < 2)
    throw ConfigError("empty dof set");
  const double k = coeff.k;
  SparseMatrix K = volume_form(mesh, coeff, rect, 1.0, -k * k, true);
  const double h = mesh.spec.h();
  const double sign = kind == FormKind::primal ? -1.0 : 1.0;
  std::vector<Triplet> trip;
  for_each_boundary_edge(mesh, rect, [&](Side side, int pos, int a, int b, double, double, double, double) {
    if (mesh.boundary_edge_kind[static_cast<int>(side)][pos] != BoundaryKind::robin)
      return;
    const double beta = coeff.beta[static_cast<int>(side)][pos];
    const Complex c = sign * I * k * beta * h / 6.0;
    trip.emplace_back(a, a, 2.0 * c);
    trip.emplace_back(b, b, 2.0 * c);
    trip.emplace_back(a, b, c);
    trip.emplace_back(b, a, c);
  });
  if (!trip.empty()) {
    SparseMatrix R(K.rows(), K.cols());
    R.setFromTriplets(trip.begin(), trip.end());
    K += R;
  }
  return K;
}

SparseMatrix assemble_energy_gram(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                  const Rect &rect) {
  if (rect.nodes_x() < 2 || rect.nodes_y() < 2)
    throw ConfigError("empty dof set");
  return volume_form(mesh, coeff, rect, 1.0, coeff.k * coeff.k, true);
}

SparseMatrix assemble_mass(const TwoLevelMesh &mesh, const Rect &rect) {
  CoefficientField unused;
  return volume_form(mesh, unused, rect, 0.0, 1.0, false);
}

Vector assemble_load(const TwoLevelMesh &mesh, const Rect &rect, const ScalarField &f) {
  Vector F = Vector::Zero(rect.num_nodes());
  if (!f)
    return F;
  const double h = mesh.spec.h();
  for (int j = rect.j0; j < rect.j1; ++j) {
    for (int i = rect.i0; i < rect.i1; ++i) {
      const auto nodes = cell_nodes(rect, i, j);
      for (double s : kGauss2) {
        for (double t : kGauss2) {
          const Complex fv = f(mesh.x(i) + s * h, mesh.x(j) + t * h);
          if (fv == Complex(0.0))
            continue;
          const auto N = q1_values(s, t);
          for (int a = 0; a < 4; ++a)
            F(nodes[a]) += 0.25 * h * h * N[a] * fv;
        }
      }
    }
  }
  return F;
}

Vector assemble_boundary_load(const TwoLevelMesh &mesh, const Rect &rect, const BoundaryFlux &g) {
  Vector G = Vector::Zero(rect.num_nodes());
  if (!g)
    return G;
  const double h = mesh.spec.h();
  for_each_boundary_edge(mesh, rect,
                         [&](Side side, int pos, int a, int b, double xa, double ya, double xb, double yb) {
                           if (mesh.boundary_edge_kind[static_cast<int>(side)][pos] ==
                               BoundaryKind::dirichlet)
                             return;
                           for (double s : kGauss2) {
                             const Complex gv = g(xa + s * (xb - xa), ya + s * (yb - ya), side);
                             G(a) += 0.5 * h * (1 - s) * gv;
                             G(b) += 0.5 * h * s * gv;
                           }
                         });
  return G;
}

Vector dirichlet_values(const TwoLevelMesh &mesh, const Rect &rect, const ScalarField &dirichlet) {
  Vector u = Vector::Zero(rect.num_nodes());
  if (!dirichlet)
    return u;
  for (int j = rect.j0; j <= rect.j1; ++j)
    for (int i = rect.i0; i <= rect.i1; ++i)
      if (mesh.tags[mesh.node(i, j)] == NodeTag::dirichlet)
        u(rect.local(i, j)) = dirichlet(mesh.x(i), mesh.x(j));
  return u;
}

PartitionedMatrix partition(const SparseMatrix &K, const Subdomain &sd) {
  std::vector<Triplet> ff, fd;
  for (int row = 0; row < K.outerSize(); ++row) {
    const int fr = sd.local_to_free[row];
    if (fr < 0)
      continue;
    for (SparseMatrix::InnerIterator it(K, row); it; ++it) {
      const int col = static_cast<int>(it.col());
      if (sd.local_to_free[col] >= 0)
        ff.emplace_back(fr, sd.local_to_free[col], it.value());
      else
        fd.emplace_back(fr, sd.local_to_fixed[col], it.value());
    }
  }
  PartitionedMatrix out;
  out.free_free.resize(sd.num_free(), sd.num_free());
  out.free_free.setFromTriplets(ff.begin(), ff.end());
  out.free_fixed.resize(sd.num_free(), sd.num_fixed());
  out.free_fixed.setFromTriplets(fd.begin(), fd.end());
  return out;
}

double quadratic_form(const SparseMatrix &M, const Vector &v) { return v.dot(M * v).real(); }

namespace {

ReferenceSolution solve_global(const TwoLevelMesh &mesh, const SparseMatrix &K, const Vector &F,
                               const Vector &fixed_values, const char *context) {
  const Subdomain sd = mesh.subdomain(mesh.full_rect());
  const auto parts = partition(K, sd);
  Vector ud(sd.num_fixed());
  for (int q = 0; q < sd.num_fixed(); ++q)
    ud(q) = fixed_values(sd.fixed_local[q]);
  Vector rhs(sd.num_free());
  for (int p = 0; p < sd.num_free(); ++p)
    rhs(p) = F(sd.free_local[p]);
  if (sd.num_fixed() > 0)
    rhs -= parts.free_fixed * ud;
  SparseFactorization lu(parts.free_free, context);
  const Vector uf = lu.solve(rhs);

  ReferenceSolution out;
  out.rcond = lu.rcond();
  out.u = fixed_values;
  for (int p = 0; p < sd.num_free(); ++p)
    out.u(sd.free_local[p]) = uf(p);
  const double scale = rhs.norm();
  out.relative_residual = scale > 0.0 ? (parts.free_free * uf - rhs).norm() / scale : 0.0;
  return out;
}

} // namespace

ReferenceSolution solve_reference(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                  const SourceTerms &src) {
  const Rect all = mesh.full_rect();
  const SparseMatrix K = assemble_sesquilinear(mesh, coeff, all, FormKind::primal);
  const Vector F = assemble_load(mesh, all, src.f) + assemble_boundary_load(mesh, all, src.g);
  return solve_global(mesh, K, F, dirichlet_values(mesh, all, src.dirichlet), "reference solve");
}

ReferenceSolution solve_adjoint(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                const ScalarField &f) {
  const Rect all = mesh.full_rect();
  const SparseMatrix K = assemble_sesquilinear(mesh, coeff, all, FormKind::adjoint);
  const Vector F = assemble_load(mesh, all, f);
  return solve_global(mesh, K, F, Vector::Zero(mesh.num_fine_nodes()), "adjoint solve");
}

double relative_l2_error(const TwoLevelMesh &mesh, const Vector &u, const ScalarField &exact) {
  static const double g3[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double w3[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const double h = mesh.spec.h();
  const Rect all = mesh.full_rect();
  double err = 0.0, ref = 0.0;
  for (int j = 0; j < mesh.n(); ++j) {
    for (int i = 0; i < mesh.n(); ++i) {
      const auto nodes = cell_nodes(all, i, j);
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          const auto N = q1_values(g3[a], g3[b]);
          Complex uh = 0.0;
          for (int p = 0; p < 4; ++p)
            uh += N[p] * u(nodes[p]);
          const Complex ue = exact(mesh.x(i) + g3[a] * h, mesh.x(j) + g3[b] * h);
          const double w = w3[a] * w3[b] * h * h;
          err += w * std::norm(uh - ue);
          ref += w * std::norm(ue);
        }
      }
    }
  }
  return std::sqrt(err / ref);
}

Vector prolongate(const Vector &u, int n) {
  const int nc = n + 1, m = 2 * n, nf = m + 1;
  if (u.size() != static_cast<Eigen::Index>(nc) * nc)
    throw ConfigError("prolongate: vector does not match grid");
  Vector out(static_cast<Eigen::Index>(nf) * nf);
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i <= m; ++i) {
      const int i0 = i / 2, j0 = j / 2;
      const int i1 = std::min(i0 + (i % 2), n), j1 = std::min(j0 + (j % 2), n);
      out(j * nf + i) =
          0.25 * (u(j0 * nc + i0) + u(j0 * nc + i1) + u(j1 * nc + i0) + u(j1 * nc + i1));
    }
  }
  return out;
}

} // namespace ecms
