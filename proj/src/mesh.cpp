#include "ecms/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "ecms/common.hpp"

namespace ecms {

std::string to_string(Side side) {
  switch (side) {
  case Side::bottom: return "bottom";
  case Side::top: return "top";
  case Side::left: return "left";
  case Side::right: return "right";
  }
  return "?";
}

std::string to_string(BoundaryKind kind) {
  switch (kind) {
  case BoundaryKind::dirichlet: return "dirichlet";
  case BoundaryKind::neumann: return "neumann";
  case BoundaryKind::robin: return "robin";
  }
  return "?";
}

Side side_from_string(const std::string &s) {
  if (s == "bottom") return Side::bottom;
  if (s == "top") return Side::top;
  if (s == "left") return Side::left;
  if (s == "right") return Side::right;
  throw ConfigError("unknown boundary side '" + s + "'");
}

BoundaryKind boundary_kind_from_string(const std::string &s) {
  if (s == "dirichlet") return BoundaryKind::dirichlet;
  if (s == "neumann") return BoundaryKind::neumann;
  if (s == "robin") return BoundaryKind::robin;
  throw ConfigError("unknown boundary kind '" + s + "'");
}

BoundaryClassification BoundaryClassification::uniform(BoundaryKind kind) {
  BoundaryClassification bc;
  for (Side s : {Side::bottom, Side::top, Side::left, Side::right})
    bc.segments.push_back({s, 0.0, 1.0, kind});
  return bc;
}

namespace {

int precedence(BoundaryKind kind) {
  switch (kind) {
  case BoundaryKind::dirichlet: return 3;
  case BoundaryKind::robin: return 2;
  case BoundaryKind::neumann: return 1;
  }
  return 0;
}

NodeTag tag_of(BoundaryKind kind) {
  switch (kind) {
  case BoundaryKind::dirichlet: return NodeTag::dirichlet;
  case BoundaryKind::neumann: return NodeTag::neumann;
  case BoundaryKind::robin: return NodeTag::robin;
  }
  return NodeTag::interior;
}

// Segment endpoints converted to fine-grid positions along the side.
struct GridSegment {
  int from, to;
  BoundaryKind kind;
};

std::array<std::vector<GridSegment>, 4> validate_boundary(const BoundaryClassification &bc, int n) {
  std::array<std::vector<GridSegment>, 4> per_side;
  for (const auto &seg : bc.segments) {
    auto to_grid = [n](double t) {
      const double scaled = t * n;
      const double rounded = std::round(scaled);
      if (std::abs(scaled - rounded) > 1e-9 * std::max(1.0, scaled))
        throw ConfigError("boundary segment endpoint " + std::to_string(t) +
                          " is not a multiple of the fine mesh size");
      return static_cast<int>(rounded);
    };
    const int a = to_grid(seg.from), b = to_grid(seg.to);
    if (a < 0 || b > n || a >= b)
      throw ConfigError("boundary segment on " + to_string(seg.side) + " has invalid interval [" +
                        std::to_string(seg.from) + ", " + std::to_string(seg.to) + "]");
    per_side[static_cast<int>(seg.side)].push_back({a, b, seg.kind});
  }
  for (int s = 0; s < 4; ++s) {
    auto &segs = per_side[s];
    std::sort(segs.begin(), segs.end(), [](auto &l, auto &r) { return l.from < r.from; });
    int covered = 0;
    for (const auto &g : segs) {
      if (g.from != covered)
        throw ConfigError("boundary segments on side " + to_string(static_cast<Side>(s)) +
                          (g.from < covered ? " overlap" : " leave a gap"));
      covered = g.to;
    }
    if (covered != n)
      throw ConfigError("boundary segments do not cover side " + to_string(static_cast<Side>(s)));
  }
  return per_side;
}

} // namespace

int TwoLevelMesh::coarse_node_index(int ci, int cj) const {
  const int nH = spec.nH;
  if (ci <= 0 || cj <= 0 || ci >= nH || cj >= nH)
    return -1;
  return (cj - 1) * (nH - 1) + (ci - 1);
}

bool TwoLevelMesh::is_coarse_node(int fine_id) const {
  return node_i(fine_id) % spec.refine == 0 && node_j(fine_id) % spec.refine == 0;
}

bool TwoLevelMesh::is_interior_coarse_node(int fine_id) const {
  if (!is_coarse_node(fine_id))
    return false;
  return coarse_node_index(node_i(fine_id) / spec.refine, node_j(fine_id) / spec.refine) >= 0;
}

std::vector<int> TwoLevelMesh::edge_fine_nodes(int edge) const {
  const auto &e = edges.at(edge);
  const int r = spec.refine;
  std::vector<int> out;
  out.reserve(r + 1);
  for (int t = 0; t <= r; ++t)
    out.push_back(e.horizontal ? node(e.ci * r + t, e.cj * r) : node(e.ci * r, e.cj * r + t));
  return out;
}

std::vector<int> TwoLevelMesh::edge_dofs(int edge) const {
  std::vector<int> out;
  for (int id : edge_fine_nodes(edge))
    if (!is_interior_coarse_node(id) && tags[id] != NodeTag::dirichlet)
      out.push_back(id);
  return out;
}

bool TwoLevelMesh::on_skeleton(int fine_id) const {
  const int i = node_i(fine_id), j = node_j(fine_id), r = spec.refine;
  const bool on_row = j % r == 0 && j > 0 && j < n();
  const bool on_col = i % r == 0 && i > 0 && i < n();
  return on_row || on_col;
}

Subdomain TwoLevelMesh::subdomain(const Rect &rect) const {
  Subdomain sd;
  sd.rect = rect;
  const int count = rect.num_nodes();
  sd.nodes.resize(count);
  sd.local_to_free.assign(count, -1);
  sd.local_to_fixed.assign(count, -1);
  const bool left_on_boundary = rect.i0 == 0, right_on_boundary = rect.i1 == n();
  const bool bottom_on_boundary = rect.j0 == 0, top_on_boundary = rect.j1 == n();
  for (int j = rect.j0; j <= rect.j1; ++j) {
    for (int i = rect.i0; i <= rect.i1; ++i) {
      const int l = rect.local(i, j);
      const int id = node(i, j);
      sd.nodes[l] = id;
      bool fixed = false;
      if (rect.on_boundary(i, j)) {
        const NodeTag tag = tags[id];
        bool natural = tag == NodeTag::neumann || tag == NodeTag::robin;
        if (i == rect.i0) natural = natural && left_on_boundary;
        if (i == rect.i1) natural = natural && right_on_boundary;
        if (j == rect.j0) natural = natural && bottom_on_boundary;
        if (j == rect.j1) natural = natural && top_on_boundary;
        fixed = !natural;
      }
      if (fixed) {
        sd.local_to_fixed[l] = static_cast<int>(sd.fixed_local.size());
        sd.fixed_local.push_back(l);
      } else {
        sd.local_to_free[l] = static_cast<int>(sd.free_local.size());
        sd.free_local.push_back(l);
      }
    }
  }
  return sd;
}

TwoLevelMesh build_mesh(const GridSpec &spec, const BoundaryClassification &bc) {
  if (spec.nH < 2 || spec.refine < 2)
    throw ConfigError("grid requires nH >= 2 and refine >= 2 (got nH=" + std::to_string(spec.nH) +
                      ", refine=" + std::to_string(spec.refine) + ")");
  TwoLevelMesh mesh;
  mesh.spec = spec;
  mesh.bc = bc;
  const int n = spec.fine_cells();
  const int nH = spec.nH;
  const int r = spec.refine;
  const auto segments = validate_boundary(bc, n);

  for (int s = 0; s < 4; ++s) {
    auto &kinds = mesh.boundary_edge_kind[s];
    kinds.resize(n);
    for (const auto &g : segments[s])
      for (int p = g.from; p < g.to; ++p)
        kinds[p] = g.kind;
  }

  mesh.tags.assign(static_cast<std::size_t>(n + 1) * (n + 1), NodeTag::interior);
  auto kind_at = [&](int side, int t, int &best) {
    for (const auto &g : segments[side])
      if (g.from <= t && t <= g.to)
        best = std::max(best, precedence(g.kind));
  };
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      if (i != 0 && i != n && j != 0 && j != n)
        continue;
      int best = 0;
      if (j == 0) kind_at(static_cast<int>(Side::bottom), i, best);
      if (j == n) kind_at(static_cast<int>(Side::top), i, best);
      if (i == 0) kind_at(static_cast<int>(Side::left), j, best);
      if (i == n) kind_at(static_cast<int>(Side::right), j, best);
      BoundaryKind kind = BoundaryKind::neumann;
      if (best == 3) kind = BoundaryKind::dirichlet;
      else if (best == 2) kind = BoundaryKind::robin;
      mesh.tags[mesh.node(i, j)] = tag_of(kind);
    }
  }

  for (int cj = 1; cj < nH; ++cj)
    for (int ci = 1; ci < nH; ++ci)
      mesh.coarse_nodes.push_back(mesh.node(ci * r, cj * r));

  for (int cj = 0; cj < nH; ++cj)
    for (int ci = 0; ci < nH; ++ci)
      mesh.elements.push_back({ci, cj, Rect{ci * r, cj * r, (ci + 1) * r, (cj + 1) * r}});

  for (int cj = 1; cj < nH; ++cj)
    for (int ci = 0; ci < nH; ++ci)
      mesh.edges.push_back({true, ci, cj, {(cj - 1) * nH + ci, cj * nH + ci}});
  for (int ci = 1; ci < nH; ++ci)
    for (int cj = 0; cj < nH; ++cj)
      mesh.edges.push_back({false, ci, cj, {cj * nH + ci - 1, cj * nH + ci}});

  return mesh;
}

Rect element_block_rect(const TwoLevelMesh &mesh, const std::vector<int> &elements) {
  if (elements.empty())
    throw ConfigError("empty element block");
  Rect rect = mesh.elements.at(elements.front()).rect;
  for (int t : elements) {
    const Rect &r = mesh.elements.at(t).rect;
    rect.i0 = std::min(rect.i0, r.i0);
    rect.j0 = std::min(rect.j0, r.j0);
    rect.i1 = std::max(rect.i1, r.i1);
    rect.j1 = std::max(rect.j1, r.j1);
  }
  const long cells = static_cast<long>(rect.nodes_x() - 1) * (rect.nodes_y() - 1);
  const long per_element = static_cast<long>(mesh.spec.refine) * mesh.spec.refine;
  if (cells != per_element * static_cast<long>(elements.size()))
    throw ConfigError("element set does not form a rectangle");
  return rect;
}

OversamplingDomain oversampling_domain(const TwoLevelMesh &mesh, int edge) {
  if (edge < 0 || edge >= static_cast<int>(mesh.edges.size()))
    throw ConfigError("edge id " + std::to_string(edge) + " out of range");
  const auto &e = mesh.edges[edge];
  const int nH = mesh.spec.nH;
  // Elements whose closure meets the closed edge: the two neighbors plus the
  // ones sharing an endpoint across the edge direction.
  int c0, c1, r0, r1;
  if (e.horizontal) {
    c0 = std::max(e.ci - 1, 0);
    c1 = std::min(e.ci + 1, nH - 1);
    r0 = e.cj - 1;
    r1 = e.cj;
  } else {
    c0 = e.ci - 1;
    c1 = e.ci;
    r0 = std::max(e.cj - 1, 0);
    r1 = std::min(e.cj + 1, nH - 1);
  }
  OversamplingDomain od;
  od.edge = edge;
  for (int cj = r0; cj <= r1; ++cj)
    for (int ci = c0; ci <= c1; ++ci)
      od.elements.push_back(cj * nH + ci);
  od.rect = element_block_rect(mesh, od.elements);
  const Subdomain sd = mesh.subdomain(od.rect);
  for (int l = 0; l < od.rect.num_nodes(); ++l) {
    const int id = sd.nodes[l];
    const int i = mesh.node_i(id), j = mesh.node_j(id);
    if (sd.local_to_fixed[l] >= 0)
      od.dirichlet_fine_nodes.push_back(id);
    else if (od.rect.on_boundary(i, j))
      od.natural_fine_nodes.push_back(id);
    else
      od.interior_fine_nodes.push_back(id);
  }
  return od;
}

} // namespace ecms
