#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ecms/common.hpp"
#include "ecms/mesh.hpp"

namespace ecms {

/// Piecewise-constant coefficients: A and V per fine cell (row-major, cell
/// (i, j) at j * n + i), beta per boundary fine edge, and the wavenumber.
struct CoefficientField {
  double k = 0.0;
  std::vector<double> A;
  std::vector<double> V;
  std::array<std::vector<double>, 4> beta; ///< [side][position along the side]

  static CoefficientField constant(const TwoLevelMesh &mesh, double k, double A, double V,
                                   double beta);

  double A_min() const;
  double A_max() const;
  double V_min() const;
  double V_max() const;
};

using ScalarField = std::function<Complex(double x, double y)>;
/// Boundary flux g in A grad(u).nu = T_k u + g, evaluated on the given side.
using BoundaryFlux = std::function<Complex(double x, double y, Side side)>;

/// Right-hand side data of a problem. Empty functions mean zero.
struct SourceTerms {
  ScalarField f;
  BoundaryFlux g;
  ScalarField dirichlet;
};

/// Which sign the Robin term carries: the primal form has -(ik beta u, v),
/// the adjoint form +(ik beta u, v).
enum class FormKind { primal, adjoint };

/// Q1 element matrices on the unit reference square, nodes counterclockwise
/// from the lower-left corner, computed with 2x2 Gauss quadrature.
const RealMatrix &q1_reference_stiffness();
const RealMatrix &q1_reference_mass();

/// Sesquilinear form a(u, v) = v^H K u over all fine nodes of `rect`
/// (local row-major numbering). The Robin term is added on the rectangle
/// sides that lie on the domain boundary.
SparseMatrix assemble_sesquilinear(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                   const Rect &rect, FormKind kind = FormKind::primal);

/// Energy Gram K_A + k^2 M_{V^2}; real symmetric positive semidefinite.
SparseMatrix assemble_energy_gram(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                  const Rect &rect);

/// Plain L2 mass matrix.
SparseMatrix assemble_mass(const TwoLevelMesh &mesh, const Rect &rect);

/// (f, phi_j) by 2x2 Gauss quadrature per cell.
Vector assemble_load(const TwoLevelMesh &mesh, const Rect &rect, const ScalarField &f);

/// (g, phi_j) over the Neumann/Robin fine edges on rect sides lying on the
/// domain boundary, 2-point Gauss per edge.
Vector assemble_boundary_load(const TwoLevelMesh &mesh, const Rect &rect, const BoundaryFlux &g);

/// Values of `dirichlet` at the globally Dirichlet-tagged nodes of `rect`,
/// zero elsewhere.
Vector dirichlet_values(const TwoLevelMesh &mesh, const Rect &rect, const ScalarField &dirichlet);

/// Rows/columns of a rect-local matrix split by a subdomain partition.
struct PartitionedMatrix {
  SparseMatrix free_free;
  SparseMatrix free_fixed;
};
PartitionedMatrix partition(const SparseMatrix &K, const Subdomain &sd);

/// Real part of v^H M v.
double quadratic_form(const SparseMatrix &M, const Vector &v);

struct ReferenceSolution {
  Vector u; ///< full fine grid, Dirichlet nodes carry the prescribed values
  double relative_residual = 0.0;
  double rcond = 0.0;
};

/// Classical fine-grid FEM solution by sparse direct factorization.
ReferenceSolution solve_reference(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                  const SourceTerms &src);

/// Adjoint problem: Robin sign flipped, homogeneous boundary data.
ReferenceSolution solve_adjoint(const TwoLevelMesh &mesh, const CoefficientField &coeff,
                                const ScalarField &f);

/// Relative L2 error of a fine Q1 function against an analytic field, with
/// 3x3 Gauss quadrature per fine cell.
double relative_l2_error(const TwoLevelMesh &mesh, const Vector &u, const ScalarField &exact);

/// Interpolates a Q1 function on an n x n grid onto the 2n x 2n grid (exact).
Vector prolongate(const Vector &u, int n);

} // namespace ecms
