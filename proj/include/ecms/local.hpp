#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecms/common.hpp"
#include "ecms/fem.hpp"
#include "ecms/linalg.hpp"
#include "ecms/mesh.hpp"
#include "ecms/parallel.hpp"

namespace ecms {

/// Local Helmholtz problem on a coarse element or an oversampling patch. The
/// free block of the sesquilinear matrix is factorized once and reused for
/// every trace and right-hand side.
class LocalProblem {
public:
  LocalProblem(const TwoLevelMesh &mesh, const CoefficientField &coeff, const Rect &rect,
               const std::string &context = "local problem");

  const Subdomain &subdomain() const { return sd_; }
  const Rect &rect() const { return sd_.rect; }
  /// Sesquilinear matrix over all nodes of the rectangle.
  const SparseMatrix &matrix() const { return K_; }
  const SparseFactorization &factorization() const { return lu_; }

  /// Rect-local solution with the given values on the fixed nodes and load
  /// vector (rect-local, entries at fixed nodes ignored).
  Vector solve(const Vector &fixed_values, const Vector &load) const;
  /// One column per trace column (traces indexed by fixed nodes).
  Matrix extend(const Matrix &traces) const;

private:
  Subdomain sd_;
  SparseMatrix K_;
  SparseMatrix K_free_fixed_;
  SparseFactorization lu_;
};

/// Helmholtz-harmonic function with the given trace on the fixed nodes.
Vector harmonic_extension(const LocalProblem &lp, const Vector &trace);

/// Zero trace on the fixed nodes, load f.
Vector bubble_solve(const TwoLevelMesh &mesh, const LocalProblem &lp, const ScalarField &f);

/// Bubble of a patch problem; same system as bubble_solve on the patch.
Vector oversampling_bubble(const TwoLevelMesh &mesh, const LocalProblem &patch, const ScalarField &f);

/// Bubble plus particular part: load f, boundary flux g on the natural part
/// and Dirichlet data on globally Dirichlet nodes; zero on the other fixed nodes.
Vector particular_solve(const TwoLevelMesh &mesh, const LocalProblem &lp, const SourceTerms &src);

/// One factorized local problem per coarse element, reused by every stage.
class ElementSolvers {
public:
  ElementSolvers(const TwoLevelMesh &mesh, const CoefficientField &coeff, Execution exec);
  const LocalProblem &operator[](int element) const { return problems_[element]; }
  int size() const { return static_cast<int>(problems_.size()); }

private:
  std::vector<LocalProblem> problems_;
};

/// Oversampling patch problems, one per edge of E_H.
class PatchSolvers {
public:
  PatchSolvers(const TwoLevelMesh &mesh, const CoefficientField &coeff, Execution exec);
  const LocalProblem &operator[](int edge) const { return problems_[edge]; }
  int size() const { return static_cast<int>(problems_.size()); }

private:
  std::vector<LocalProblem> problems_;
};

/// Writes rect-local values into a global fine vector.
void scatter(const Subdomain &sd, const Vector &local, Vector &global);
/// Reads the fixed-node values of a subdomain out of a global fine vector.
Vector gather_fixed(const Subdomain &sd, const Vector &global);

/// Per-element harmonic extension of the values a global vector holds on
/// every element's fixed nodes (the coarse skeleton and Dirichlet nodes).
Vector extend_skeleton(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                       const Vector &skeleton_values, Execution exec);

/// Glued per-element bubble (plus particular) part.
Vector bubble_part(const TwoLevelMesh &mesh, const ElementSolvers &elements,
                   const SourceTerms &src, Execution exec);

/// Interpolation residue (v - I_H v) of a patch-local function at the edge
/// dofs. I_H uses the interior coarse nodes only.
Vector edge_residue(const TwoLevelMesh &mesh, int edge, const Subdomain &patch,
                    const Vector &patch_values);

/// The special Helmholtz-harmonic part u^s: edge values are the residues of
/// the oversampling bubbles (plus particular parts). `patches` may be null, in
/// which case patch problems are factorized on the fly.
Vector build_u_s(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                 const ElementSolvers &elements, const PatchSolvers *patches,
                 const SourceTerms &src, Execution exec);

/// Glued u^h and u^b (with particular part) of a fine function.
struct Decomposition {
  Vector harmonic;
  Vector bubble;
};
Decomposition decompose(const TwoLevelMesh &mesh, const ElementSolvers &elements, const Vector &u,
                        const SourceTerms &src, Execution exec);

/// H <= A_min^{1/2} / (sqrt(2) C_P V_max k).
struct MeshAssumption {
  double H = 0.0;
  double bound = 0.0;
  bool satisfied = false;
};
MeshAssumption check_mesh_assumption(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                     double C_P);

} // namespace ecms
