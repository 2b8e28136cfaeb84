#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace ecms {

/// Two-level uniform grid on the unit square: nH coarse cells per side, each
/// split into `refine` fine cells per side.
struct GridSpec {
  int nH = 0;
  int refine = 0;

  int fine_cells() const { return nH * refine; }
  double H() const { return 1.0 / nH; }
  double h() const { return 1.0 / fine_cells(); }
};

enum class Side : std::uint8_t { bottom = 0, top = 1, left = 2, right = 3 };
enum class BoundaryKind : std::uint8_t { dirichlet, neumann, robin };

std::string to_string(Side side);
std::string to_string(BoundaryKind kind);
Side side_from_string(const std::string &s);
BoundaryKind boundary_kind_from_string(const std::string &s);

struct BoundarySegment {
  Side side;
  double from;
  double to;
  BoundaryKind kind;
};

struct BoundaryClassification {
  std::vector<BoundarySegment> segments;

  static BoundaryClassification uniform(BoundaryKind kind);
};

enum class NodeTag : std::uint8_t { interior, dirichlet, neumann, robin };

/// Axis-aligned block of fine nodes [i0, i1] x [j0, j1] (inclusive), always
/// aligned with coarse element boundaries when it describes a subdomain.
struct Rect {
  int i0 = 0, j0 = 0, i1 = 0, j1 = 0;

  int nodes_x() const { return i1 - i0 + 1; }
  int nodes_y() const { return j1 - j0 + 1; }
  int num_nodes() const { return nodes_x() * nodes_y(); }
  int local(int i, int j) const { return (j - j0) * nodes_x() + (i - i0); }
  bool contains(int i, int j) const { return i >= i0 && i <= i1 && j >= j0 && j <= j1; }
  bool on_boundary(int i, int j) const {
    return contains(i, j) && (i == i0 || i == i1 || j == j0 || j == j1);
  }
  bool operator==(const Rect &) const = default;
};

/// Coarse edge in E_H. (ci, cj) is the coarse index of the lower/left endpoint.
struct CoarseEdge {
  bool horizontal = true;
  int ci = 0, cj = 0;
  std::array<int, 2> elements{}; ///< N(e, T_H): below/left, then above/right
};

struct CoarseElement {
  int ci = 0, cj = 0;
  Rect rect;
};

/// Fine nodes of a rectangular subdomain split into the ones fixed by a local
/// Dirichlet condition and the free ones (interior plus natural-boundary nodes).
/// A node on the subdomain boundary is natural only if it carries a Neumann or
/// Robin tag and every side of the rectangle through it lies on the domain
/// boundary; everything else on the boundary is fixed.
struct Subdomain {
  Rect rect;
  std::vector<int> nodes;      ///< global fine ids in local row-major order
  std::vector<int> free_local; ///< local indices of free nodes
  std::vector<int> fixed_local;
  std::vector<int> local_to_free;  ///< -1 for fixed nodes
  std::vector<int> local_to_fixed; ///< -1 for free nodes

  int num_free() const { return static_cast<int>(free_local.size()); }
  int num_fixed() const { return static_cast<int>(fixed_local.size()); }
};

/// Oversampling patch of an edge: union of the coarse elements whose closure meets it.
struct OversamplingDomain {
  int edge = -1;
  std::vector<int> elements;
  Rect rect;
  std::vector<int> dirichlet_fine_nodes; ///< on the patch boundary, fixed
  std::vector<int> natural_fine_nodes;   ///< on the patch boundary, Neumann/Robin
  std::vector<int> interior_fine_nodes;
};

class TwoLevelMesh {
public:
  GridSpec spec;
  BoundaryClassification bc;

  std::vector<int> coarse_nodes; ///< fine ids of the interior coarse nodes N_H
  std::vector<CoarseEdge> edges; ///< E_H: horizontal by (row, col), then vertical
  std::vector<CoarseElement> elements; ///< T_H, row-major
  std::vector<NodeTag> tags;           ///< per fine node
  /// Kind of every boundary fine edge, indexed [side][position along the side].
  std::array<std::vector<BoundaryKind>, 4> boundary_edge_kind;

  int n() const { return spec.fine_cells(); }
  int nodes_per_side() const { return n() + 1; }
  int num_fine_nodes() const { return nodes_per_side() * nodes_per_side(); }
  int node(int i, int j) const { return j * nodes_per_side() + i; }
  int node_i(int id) const { return id % nodes_per_side(); }
  int node_j(int id) const { return id / nodes_per_side(); }
  double x(int i) const { return static_cast<double>(i) / n(); }
  Rect full_rect() const { return {0, 0, n(), n()}; }

  /// Index into coarse_nodes for coarse grid position (ci, cj), or -1 if that
  /// position lies on the domain boundary.
  int coarse_node_index(int ci, int cj) const;
  bool is_coarse_node(int fine_id) const;
  bool is_interior_coarse_node(int fine_id) const;

  /// Fine nodes along the closed edge, ordered from the lower/left endpoint.
  std::vector<int> edge_fine_nodes(int edge) const;
  /// Degrees of freedom of an edge function: fine nodes of the closed edge
  /// minus interior coarse nodes and Dirichlet nodes.
  std::vector<int> edge_dofs(int edge) const;

  /// True when the fine node lies on a coarse edge of E_H (endpoints included).
  bool on_skeleton(int fine_id) const;

  Subdomain subdomain(const Rect &rect) const;
};

TwoLevelMesh build_mesh(const GridSpec &spec, const BoundaryClassification &bc);

OversamplingDomain oversampling_domain(const TwoLevelMesh &mesh, int edge);

/// Rectangle covering a set of coarse element ids (must form a rectangle).
Rect element_block_rect(const TwoLevelMesh &mesh, const std::vector<int> &elements);

} // namespace ecms
