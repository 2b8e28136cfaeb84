#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ecms/common.hpp"
#include "ecms/fem.hpp"
#include "ecms/local.hpp"
#include "ecms/mesh.hpp"
#include "ecms/parallel.hpp"

namespace ecms {

/// Fine function stored on its support only.
struct BasisFunction {
  std::vector<int> nodes; ///< global fine ids, ascending
  Vector values;

  Vector to_global(int num_fine_nodes) const;
};

/// MsFEM tents: one Helmholtz-harmonic function per interior coarse node.
struct NodalBasis {
  std::vector<BasisFunction> functions; ///< same order as mesh.coarse_nodes
};

NodalBasis build_nodal_basis(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                             Execution exec);

/// Discrete R_e and the two Gram matrices of its singular value problem.
struct RestrictionDiscretization {
  int edge = -1;
  std::vector<int> trace_nodes; ///< fixed, non-Dirichlet fine nodes of dω_e (global ids)
  std::vector<int> edge_dofs;   ///< see TwoLevelMesh::edge_dofs
  Matrix R;                     ///< edge_dofs x trace_nodes
  Matrix A_gram;                ///< energy of the patch extension, trace x trace
  Matrix B_gram;                ///< H^{1/2}(e) Gram, edge_dofs x edge_dofs
  Matrix extension;             ///< patch-local nodes x trace_nodes (kept only on request)
};

/// Per-element extension of unit edge vectors zero-extended to the other
/// sides of the two elements of N(e, T_H).
struct EdgeExtension {
  std::vector<int> elements;     ///< the elements of N(e, T_H)
  std::vector<Matrix> functions; ///< per element: rect-local nodes x edge dofs
};
EdgeExtension extend_edge_unit_vectors(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                                       int edge);

/// `edge_ext` receives the per-element edge extensions when non-null.
RestrictionDiscretization build_restriction(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                            const LocalProblem &patch,
                                            const ElementSolvers &elements, int edge,
                                            bool keep_extension = false,
                                            EdgeExtension *edge_ext = nullptr);

struct EdgeBasis {
  int edge = -1;
  RealVector singular_values; ///< all computed values, descending
  Matrix vectors;             ///< edge values, B-orthonormal columns
  std::vector<BasisFunction> functions;
  bool truncated = false;   ///< fewer vectors than requested
  bool regularized = false; ///< the Gram needed a diagonal shift
};

/// Relative cutoff below which a singular value is treated as zero and its
/// vector is not used.
inline constexpr double kSingularValueFloor = 1e-13;

/// Top-m left singular vectors of R_e: (R^H B R) g = lambda^2 A g, then
/// v = R g, B-orthonormalized and phase-normalized.
EdgeBasis edge_svd(const RestrictionDiscretization &rd, int m);

/// Fills `basis.functions` from `basis.vectors`. `ext` is recomputed when null.
void attach_edge_functions(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                           EdgeBasis &basis, const EdgeExtension *ext = nullptr);

struct EdgeBasisSet {
  int m = 0;
  std::vector<EdgeBasis> edges;
};

/// Offline stage over every edge; `patches` may be null.
EdgeBasisSet build_edge_bases(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                              const ElementSolvers &elements, const PatchSolvers *patches, int m,
                              Execution exec);

struct TrialSpace {
  SparseColMatrix Phi;
  std::vector<int> column_edge; ///< -1 for nodal columns
  std::vector<int> column_rank; ///< coarse node index or j within the edge
  int num_nodal = 0;
};

/// Columns: nodal functions, then per edge its first m functions.
TrialSpace assemble_trial_space(const TwoLevelMesh &mesh, const NodalBasis &nodal,
                                const EdgeBasisSet &edges, int m);

/// Multiplies the vector by a unit phase so the largest-magnitude entry is
/// real positive. Returns the phase used.
Complex normalize_phase(Vector &v);

// Binary cache of an EdgeBasisSet.

/// FNV-1a over k, grid, boundary classification and coefficient samples.
std::uint64_t coefficient_hash(const TwoLevelMesh &mesh, const CoefficientField &coeff);

void save_edge_bases(const std::string &path, std::uint64_t hash, const TwoLevelMesh &mesh,
                     const EdgeBasisSet &set);

/// Returns nothing if the file is missing, has another hash or grid, or holds
/// fewer than m vectors per edge. Edge functions are rebuilt from the vectors.
std::optional<EdgeBasisSet> load_edge_bases(const std::string &path, std::uint64_t hash,
                                            const TwoLevelMesh &mesh,
                                            const ElementSolvers &elements, int m);

} // namespace ecms
