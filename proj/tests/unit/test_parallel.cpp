#include <doctest.h>

#include <atomic>
#include <stdexcept>

#include <omp.h>

#include "ecms/sweep.hpp"
#include "support.hpp"

using namespace ecms;

namespace {

// Four threads even on a single core, so the parallel path really interleaves.
struct Threads {
  int saved = omp_get_max_threads();
  Threads() { omp_set_num_threads(4); }
  ~Threads() { omp_set_num_threads(saved); }
};

bool same(const BasisFunction &a, const BasisFunction &b) {
  return a.nodes == b.nodes && a.values == b.values;
}

} // namespace

TEST_CASE("for_each_index visits every index once and rethrows") {
  Threads t;
  std::vector<int> hits(100, 0);
  for_each_index(Execution::parallel, 100, [&](int i) { hits[i] += 1; });
  for (int h : hits)
    CHECK(h == 1);

  std::atomic<int> ran{0};
  CHECK_THROWS_AS(for_each_index(Execution::parallel, 50,
                                 [&](int i) {
                                   ++ran;
                                   if (i == 17)
                                     throw std::runtime_error("task 17");
                                 }),
                  std::runtime_error);
  CHECK(ran.load() == 50);
}

TEST_CASE("serial and parallel offline stages are identical") {
  Threads t;
  const Problem p = instantiate(mixed_random_problem(3, 8.0), {4, 6});
  const ElementSolvers es(p.mesh, p.coeff, Execution::serial);
  const ElementSolvers ep(p.mesh, p.coeff, Execution::parallel);
  const PatchSolvers ps(p.mesh, p.coeff, Execution::serial);
  const PatchSolvers pp(p.mesh, p.coeff, Execution::parallel);

  const Vector u = solve_reference(p.mesh, p.coeff, p.src).u;
  const Decomposition ds = decompose(p.mesh, es, u, p.src, Execution::serial);
  const Decomposition dp = decompose(p.mesh, ep, u, p.src, Execution::parallel);
  CHECK(ds.harmonic == dp.harmonic);
  CHECK(ds.bubble == dp.bubble);

  const NodalBasis ns = build_nodal_basis(p.mesh, es, Execution::serial);
  const NodalBasis np = build_nodal_basis(p.mesh, ep, Execution::parallel);
  REQUIRE(ns.functions.size() == np.functions.size());
  for (std::size_t a = 0; a < ns.functions.size(); ++a)
    CHECK(same(ns.functions[a], np.functions[a]));

  const EdgeBasisSet bs = build_edge_bases(p.mesh, p.coeff, es, &ps, 3, Execution::serial);
  const EdgeBasisSet bp = build_edge_bases(p.mesh, p.coeff, ep, &pp, 3, Execution::parallel);
  REQUIRE(bs.edges.size() == bp.edges.size());
  for (std::size_t e = 0; e < bs.edges.size(); ++e) {
    CHECK(bs.edges[e].singular_values == bp.edges[e].singular_values);
    CHECK(bs.edges[e].vectors == bp.edges[e].vectors);
    REQUIRE(bs.edges[e].functions.size() == bp.edges[e].functions.size());
    for (std::size_t j = 0; j < bs.edges[e].functions.size(); ++j)
      CHECK(same(bs.edges[e].functions[j], bp.edges[e].functions[j]));
  }

  const Vector uss = build_u_s(p.mesh, p.coeff, es, &ps, p.src, Execution::serial);
  const Vector usp = build_u_s(p.mesh, p.coeff, ep, &pp, p.src, Execution::parallel);
  CHECK(uss == usp);
}

TEST_CASE("serial and parallel sweeps write the same numbers") {
  Threads t;
  RunConfig cfg;
  cfg.problem = mie_problem(0.125, 6.0);
  cfg.grid = {4, 4};
  cfg.m_list = {0, 2};
  cfg.methods = {Method::ritz, Method::petrov};
  cfg.parallel = false;
  const SweepResult serial = run_sweep(cfg);
  cfg.parallel = true;
  const SweepResult parallel = run_sweep(cfg);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  CHECK_FALSE(serial.any_error);
  for (std::size_t r = 0; r < serial.rows.size(); ++r) {
    CHECK(serial.rows[r].e_L2 == parallel.rows[r].e_L2);
    CHECK(serial.rows[r].e_H == parallel.rows[r].e_H);
    CHECK(serial.rows[r].coarse_dim == parallel.rows[r].coarse_dim);
    CHECK(serial.rows[r].flags == parallel.rows[r].flags);
  }
}
