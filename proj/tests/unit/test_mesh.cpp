#include <doctest.h>

#include <algorithm>
#include <set>

#include "ecms/mesh.hpp"
#include "support.hpp"

using namespace ecms;

namespace {

// Elements whose closed cell meets the closed edge, in coarse coordinates.
std::set<int> brute_force_patch(const TwoLevelMesh &mesh, int edge) {
  const auto &e = mesh.edges[edge];
  const int nH = mesh.spec.nH;
  const double x0 = e.ci, y0 = e.cj;
  const double x1 = e.horizontal ? x0 + 1 : x0, y1 = e.horizontal ? y0 : y0 + 1;
  std::set<int> out;
  for (int b = 0; b < nH; ++b)
    for (int a = 0; a < nH; ++a)
      if (a <= x1 && x0 <= a + 1 && b <= y1 && y0 <= b + 1)
        out.insert(b * nH + a);
  return out;
}

} // namespace

TEST_CASE("entity counts on small grids") {
  const auto robin = BoundaryClassification::uniform(BoundaryKind::robin);
  const TwoLevelMesh m4 = build_mesh({4, 4}, robin);
  CHECK(m4.coarse_nodes.size() == 9);
  CHECK(m4.edges.size() == 24);
  CHECK(m4.elements.size() == 16);
  CHECK(m4.num_fine_nodes() == 289);

  const TwoLevelMesh m2 = build_mesh({2, 2}, robin);
  CHECK(m2.coarse_nodes.size() == 1);
  CHECK(m2.edges.size() == 4);
  CHECK(m2.elements.size() == 4);
}

TEST_CASE("entity count formulas") {
  const auto robin = BoundaryClassification::uniform(BoundaryKind::robin);
  for (int nH = 2; nH <= 64; ++nH) {
    const TwoLevelMesh m = build_mesh({nH, 2}, robin);
    REQUIRE(m.coarse_nodes.size() == static_cast<std::size_t>((nH - 1) * (nH - 1)));
    REQUIRE(m.edges.size() == static_cast<std::size_t>(2 * nH * (nH - 1)));
    REQUIRE(m.elements.size() == static_cast<std::size_t>(nH * nH));
    int interior = 0;
    for (NodeTag t : m.tags)
      interior += t == NodeTag::interior;
    REQUIRE(interior == (2 * nH - 1) * (2 * nH - 1));
  }
}

TEST_CASE("invalid grids and boundary tilings are rejected") {
  const auto robin = BoundaryClassification::uniform(BoundaryKind::robin);
  CHECK_THROWS_AS(build_mesh({1, 4}, robin), ConfigError);
  CHECK_THROWS_AS(build_mesh({4, 1}, robin), ConfigError);

  BoundaryClassification overlap = test::mixed_bc();
  overlap.segments.push_back({Side::top, 0.25, 0.5, BoundaryKind::robin});
  CHECK_THROWS_AS(build_mesh({4, 4}, overlap), ConfigError);

  BoundaryClassification gap = test::mixed_bc();
  gap.segments[0].to = 0.5;
  CHECK_THROWS_AS(build_mesh({4, 4}, gap), ConfigError);

  BoundaryClassification unaligned = test::mixed_bc();
  unaligned.segments[0] = {Side::bottom, 0.0, 0.3, BoundaryKind::dirichlet};
  unaligned.segments.push_back({Side::bottom, 0.3, 1.0, BoundaryKind::robin});
  CHECK_THROWS_AS(build_mesh({4, 4}, unaligned), ConfigError);
}

TEST_CASE("mixed boundary tagging") {
  const TwoLevelMesh m = build_mesh({32, 32}, test::mixed_bc());
  const int n = m.n();
  for (int i = 0; i <= n; ++i) {
    REQUIRE(m.tags[m.node(i, 0)] == NodeTag::dirichlet);
    if (i > 0 && i < n)
      REQUIRE(m.tags[m.node(i, n)] == NodeTag::neumann);
  }
  for (int j = 1; j <= n; ++j) {
    REQUIRE(m.tags[m.node(0, j)] == NodeTag::robin);
    REQUIRE(m.tags[m.node(n, j)] == NodeTag::robin);
  }
  // Corners: Dirichlet beats Robin beats Neumann.
  CHECK(m.tags[m.node(0, n)] == NodeTag::robin);
  CHECK(m.tags[m.node(n, 0)] == NodeTag::dirichlet);
  for (int j = 1; j < n; ++j)
    for (int i = 1; i < n; ++i)
      REQUIRE(m.tags[m.node(i, j)] == NodeTag::interior);
}

TEST_CASE("oversampling patches match the closure rule") {
  const auto robin = BoundaryClassification::uniform(BoundaryKind::robin);
  for (int nH : {2, 3, 5, 8}) {
    const TwoLevelMesh m = build_mesh({nH, 2}, robin);
    for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
      const OversamplingDomain od = oversampling_domain(m, e);
      const std::set<int> got(od.elements.begin(), od.elements.end());
      REQUIRE(got == brute_force_patch(m, e));
    }
  }

  const TwoLevelMesh m8 = build_mesh({8, 4}, robin);
  for (int e = 0; e < static_cast<int>(m8.edges.size()); ++e) {
    const auto &edge = m8.edges[e];
    const OversamplingDomain od = oversampling_domain(m8, e);
    const int w = (od.rect.i1 - od.rect.i0) / 4, h = (od.rect.j1 - od.rect.j0) / 4;
    const bool touches = edge.horizontal ? (edge.ci == 0 || edge.ci == 7)
                                         : (edge.cj == 0 || edge.cj == 7);
    if (touches) {
      REQUIRE(od.elements.size() == 4);
      REQUIRE((w == 2 && h == 2));
    } else {
      REQUIRE(od.elements.size() == 6);
      if (edge.horizontal)
        REQUIRE((w == 3 && h == 2));
      else
        REQUIRE((w == 2 && h == 3));
    }
  }

  const TwoLevelMesh m2 = build_mesh({2, 3}, robin);
  for (int e = 0; e < 4; ++e)
    CHECK(oversampling_domain(m2, e).elements.size() == 4);
}

TEST_CASE("edge lies inside its patch and patch nodes are partitioned") {
  const TwoLevelMesh m = build_mesh({6, 4}, test::mixed_bc());
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    const OversamplingDomain od = oversampling_domain(m, e);
    const auto nodes = m.edge_fine_nodes(e);
    REQUIRE(nodes.size() == 5);
    bool interior_edge = true;
    for (int id : nodes) {
      REQUIRE(od.rect.contains(m.node_i(id), m.node_j(id)));
      interior_edge = interior_edge && m.is_interior_coarse_node(nodes.front()) &&
                      m.is_interior_coarse_node(nodes.back());
    }
    if (interior_edge)
      for (int id : nodes)
        REQUIRE_FALSE(od.rect.on_boundary(m.node_i(id), m.node_j(id)));
    REQUIRE(od.dirichlet_fine_nodes.size() + od.natural_fine_nodes.size() +
                od.interior_fine_nodes.size() ==
            static_cast<std::size_t>(od.rect.num_nodes()));
    // Natural nodes only where the patch meets a Neumann or Robin boundary.
    for (int id : od.natural_fine_nodes) {
      const NodeTag t = m.tags[id];
      REQUIRE((t == NodeTag::neumann || t == NodeTag::robin));
    }
  }
}

TEST_CASE("edge dofs") {
  const TwoLevelMesh m = build_mesh({4, 6}, test::mixed_bc());
  for (int e = 0; e < static_cast<int>(m.edges.size()); ++e) {
    const auto nodes = m.edge_fine_nodes(e);
    int expected = 5; // r - 1 interior fine nodes
    for (int end : {nodes.front(), nodes.back()})
      if (!m.is_interior_coarse_node(end) && m.tags[end] != NodeTag::dirichlet)
        ++expected;
    REQUIRE(static_cast<int>(m.edge_dofs(e).size()) == expected);
  }
}

TEST_CASE("build_mesh is deterministic") {
  const TwoLevelMesh a = build_mesh({5, 3}, test::mixed_bc());
  const TwoLevelMesh b = build_mesh({5, 3}, test::mixed_bc());
  CHECK(a.tags == b.tags);
  CHECK(a.coarse_nodes == b.coarse_nodes);
  REQUIRE(a.edges.size() == b.edges.size());
  for (std::size_t e = 0; e < a.edges.size(); ++e) {
    CHECK(a.edges[e].horizontal == b.edges[e].horizontal);
    CHECK(a.edges[e].ci == b.edges[e].ci);
    CHECK(a.edges[e].cj == b.edges[e].cj);
    CHECK(a.edges[e].elements == b.edges[e].elements);
  }
}

TEST_CASE("subdomain fixed nodes") {
  const TwoLevelMesh m = build_mesh({4, 4}, test::mixed_bc());
  // Interior element: the whole boundary is fixed.
  const Subdomain inner = m.subdomain(m.elements[5].rect);
  CHECK(inner.num_fixed() == 16);
  // Left-top corner element: left side Robin and top side Neumann are natural,
  // except nodes on the element's interior sides.
  const Subdomain corner = m.subdomain(m.elements[12].rect);
  for (int q = 0; q < corner.num_fixed(); ++q) {
    const int id = corner.nodes[corner.fixed_local[q]];
    const int i = m.node_i(id), j = m.node_j(id);
    REQUIRE((i == 4 || j == 12));
  }
  CHECK(corner.num_fixed() == 9);
}
