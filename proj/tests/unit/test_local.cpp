#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ecms/local.hpp"
#include "ecms/problems.hpp"
#include "support.hpp"

using namespace ecms;

namespace {

double energy(const SparseMatrix &G, const Vector &v) { return std::sqrt(quadratic_form(G, v)); }

Vector restrict_to(const Subdomain &sd, const Vector &global) {
  Vector out(static_cast<Eigen::Index>(sd.nodes.size()));
  for (std::size_t l = 0; l < sd.nodes.size(); ++l)
    out(static_cast<Eigen::Index>(l)) = global(sd.nodes[l]);
  return out;
}

} // namespace

TEST_CASE("zero trace gives zero extension") {
  const Problem p = instantiate(planar_wave_problem(6.0), {4, 4});
  for (int t : {0, 5}) {
    const LocalProblem lp(p.mesh, p.coeff, p.mesh.elements[t].rect);
    const Vector psi = harmonic_extension(lp, Vector::Zero(lp.subdomain().num_fixed()));
    CHECK(test::max_abs(psi) == 0.0);
    CHECK(test::max_abs(bubble_solve(p.mesh, lp, [](double, double) { return Complex(0.0); })) == 0.0);
  }
}

TEST_CASE("affine patch test at k = 0") {
  const TwoLevelMesh mesh = build_mesh({4, 6}, BoundaryClassification::uniform(BoundaryKind::robin));
  const CoefficientField c = CoefficientField::constant(mesh, 0.0, 1.0, 1.0, 1.0);
  auto g = [&](int id) { return mesh.x(mesh.node_i(id)) + 2.0 * mesh.x(mesh.node_j(id)); };
  for (const Rect &r : {mesh.elements[5].rect, Rect{6, 6, 18, 18}}) {
    const LocalProblem lp(mesh, c, r);
    const Subdomain &sd = lp.subdomain();
    Vector trace(sd.num_fixed());
    for (int q = 0; q < sd.num_fixed(); ++q)
      trace(q) = g(sd.nodes[sd.fixed_local[q]]);
    const Vector psi = harmonic_extension(lp, trace);
    for (std::size_t l = 0; l < sd.nodes.size(); ++l)
      REQUIRE(std::abs(psi(static_cast<Eigen::Index>(l)) - g(sd.nodes[l])) <= 1e-10);
  }
}

TEST_CASE("decomposition reproduces the reference solution") {
  for (const ProblemSpec &spec :
       {planar_wave_problem(8.0), mie_problem(0.0625, 9.0), mixed_random_problem(2024, 8.0)}) {
    CAPTURE(spec.name);
    const Problem p = instantiate(spec, {4, 8});
    const Vector u = solve_reference(p.mesh, p.coeff, p.src).u;
    const ElementSolvers elements(p.mesh, p.coeff, Execution::serial);
    const Decomposition d = decompose(p.mesh, elements, u, p.src, Execution::serial);
    const SparseMatrix G = assemble_energy_gram(p.mesh, p.coeff, p.mesh.full_rect());
    CHECK(energy(G, d.harmonic + d.bubble - u) <= 1e-9 * energy(G, u));
  }
}

TEST_CASE("harmonic and bubble parts are left-orthogonal") {
  const Problem p = instantiate(mixed_random_problem(9, 8.0), {4, 8});
  const Vector u = solve_reference(p.mesh, p.coeff, p.src).u;
  const ElementSolvers elements(p.mesh, p.coeff, Execution::serial);
  const Decomposition d = decompose(p.mesh, elements, u, p.src, Execution::serial);
  for (int t = 0; t < elements.size(); ++t) {
    const LocalProblem &lp = elements[t];
    const Vector uh = restrict_to(lp.subdomain(), d.harmonic);
    const Vector ub = restrict_to(lp.subdomain(), d.bubble);
    const SparseMatrix Gt = assemble_energy_gram(p.mesh, p.coeff, lp.rect());
    const Complex a = ub.dot(lp.matrix() * uh);
    REQUIRE(std::abs(a) <= 1e-9 * energy(Gt, uh) * energy(Gt, ub));
  }
}

TEST_CASE("local coercivity under the mesh-size condition") {
  const Problem p = instantiate(mixed_random_problem(4, 0.4), {4, 8});
  REQUIRE(check_mesh_assumption(p.mesh, p.coeff, 1.0).satisfied);
  CoefficientField no_k = p.coeff;
  no_k.k = 0.0;
  std::mt19937_64 rng(100);
  for (int t : {0, 6, 15}) {
    const Rect &r = p.mesh.elements[t].rect;
    const SparseMatrix K = assemble_sesquilinear(p.mesh, p.coeff, r);
    const SparseMatrix KA = assemble_energy_gram(p.mesh, no_k, r);
    for (int trial = 0; trial < 100; ++trial) {
      Vector v = test::random_vector(r.num_nodes(), rng);
      // Vanish on the bottom side of the element.
      for (int i = r.i0; i <= r.i1; ++i)
        v(r.local(i, r.j0)) = 0.0;
      const double lhs = v.dot(K * v).real();
      REQUIRE(lhs >= 0.5 * quadratic_form(KA, v) - 1e-12);
    }
  }
}

TEST_CASE("mesh-size check") {
  const TwoLevelMesh mesh = build_mesh({8, 2}, BoundaryClassification::uniform(BoundaryKind::robin));
  CoefficientField c = CoefficientField::constant(mesh, 4.0, 4.0, 2.0, 1.0);
  const MeshAssumption a = check_mesh_assumption(mesh, c, 1.0);
  CHECK(a.H == 0.125);
  CHECK(a.bound == doctest::Approx(2.0 / (std::sqrt(2.0) * 2.0 * 4.0)));
  CHECK(a.satisfied);
  CHECK_FALSE(check_mesh_assumption(mesh, c, 4.0).satisfied);
}

TEST_CASE("particular solve without boundary data equals the bubble") {
  const Problem p = instantiate(planar_wave_problem(8.0), {4, 4});
  const ScalarField f = [](double x, double y) { return Complex(x * y, 1.0 - x); };
  SourceTerms with_g;
  with_g.f = f;
  with_g.g = p.src.g;
  SourceTerms no_g;
  no_g.f = f;
  // Interior element: the flux never enters.
  const LocalProblem inner(p.mesh, p.coeff, p.mesh.elements[5].rect);
  CHECK((particular_solve(p.mesh, inner, with_g) - bubble_solve(p.mesh, inner, f)).norm() == 0.0);
  // Boundary element: g = 0 reduces to the bubble, g != 0 does not.
  const LocalProblem edge(p.mesh, p.coeff, p.mesh.elements[0].rect);
  CHECK((particular_solve(p.mesh, edge, no_g) - bubble_solve(p.mesh, edge, f)).norm() == 0.0);
  SourceTerms only_g;
  only_g.g = p.src.g;
  CHECK(particular_solve(p.mesh, edge, only_g).norm() > 0.0);
}

TEST_CASE("oversampling bubble of data outside the patch vanishes") {
  const Problem p = instantiate(mie_problem(0.0625, 9.0), {8, 4});
  // Bump centered at (0.125, 0.5) with radius 1/20: far from the right half.
  const ScalarField f = rhs_bump(0.125, 0.5, 10000.0);
  for (int e = 0; e < static_cast<int>(p.mesh.edges.size()); ++e) {
    const OversamplingDomain od = oversampling_domain(p.mesh, e);
    const LocalProblem patch(p.mesh, p.coeff, od.rect);
    const Vector ub = oversampling_bubble(p.mesh, patch, f);
    if (p.mesh.x(od.rect.i0) > 0.2)
      REQUIRE(test::max_abs(ub) == 0.0);
  }
}

TEST_CASE("special part: vanishing data, coarse nodes and locality") {
  const Problem p = instantiate(mixed_random_problem(1, 8.0), {4, 8});
  const ElementSolvers elements(p.mesh, p.coeff, Execution::serial);

  const Vector zero = build_u_s(p.mesh, p.coeff, elements, nullptr, SourceTerms{}, Execution::serial);
  CHECK(test::max_abs(zero) == 0.0);

  const Vector us = build_u_s(p.mesh, p.coeff, elements, nullptr, p.src, Execution::serial);
  CHECK(us.norm() > 0.0);
  for (int id : p.mesh.coarse_nodes)
    REQUIRE(us(id) == Complex(0.0));

  // f supported in the lower-left element only: u^s is confined to elements
  // next to edges whose patch meets that element.
  SourceTerms local;
  local.f = [](double x, double y) { return (x < 0.25 && y < 0.25) ? Complex(1.0) : Complex(0.0); };
  const Vector ul = build_u_s(p.mesh, p.coeff, elements, nullptr, local, Execution::serial);
  std::vector<bool> allowed(p.mesh.elements.size(), false);
  for (int e = 0; e < static_cast<int>(p.mesh.edges.size()); ++e) {
    const auto od = oversampling_domain(p.mesh, e);
    if (std::find(od.elements.begin(), od.elements.end(), 0) != od.elements.end())
      for (int t : p.mesh.edges[e].elements)
        allowed[t] = true;
  }
  for (int t = 0; t < static_cast<int>(p.mesh.elements.size()); ++t) {
    if (allowed[t])
      continue;
    const Vector piece = restrict_to(elements[t].subdomain(), ul);
    REQUIRE(test::max_abs(piece) == 0.0);
  }
}

TEST_CASE("edge residue vanishes on linear edge data") {
  const Problem p = instantiate(planar_wave_problem(4.0), {4, 6});
  for (int e = 0; e < static_cast<int>(p.mesh.edges.size()); ++e) {
    const OversamplingDomain od = oversampling_domain(p.mesh, e);
    const Subdomain sd = p.mesh.subdomain(od.rect);
    Vector values(sd.rect.num_nodes());
    // Coarse bilinear interpolant of a function vanishing on the boundary.
    const int r = p.mesh.spec.refine;
    for (std::size_t l = 0; l < sd.nodes.size(); ++l) {
      const int id = sd.nodes[l];
      const int i = p.mesh.node_i(id), j = p.mesh.node_j(id);
      const int ci = std::min(i / r, p.mesh.spec.nH - 1), cj = std::min(j / r, p.mesh.spec.nH - 1);
      const double s = static_cast<double>(i - ci * r) / r, t = static_cast<double>(j - cj * r) / r;
      auto at = [&](int a, int b) {
        const double x = static_cast<double>(a) / p.mesh.spec.nH, y = static_cast<double>(b) / p.mesh.spec.nH;
        return x * (1 - x) * y * (1 - y);
      };
      values(static_cast<Eigen::Index>(l)) = (1 - s) * (1 - t) * at(ci, cj) + s * (1 - t) * at(ci + 1, cj) +
                                             (1 - s) * t * at(ci, cj + 1) + s * t * at(ci + 1, cj + 1);
    }
    REQUIRE(test::max_abs(edge_residue(p.mesh, e, sd, values)) <= 1e-15);
  }
}
