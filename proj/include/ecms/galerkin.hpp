#pragma once

#include <string>

#include "ecms/basis.hpp"
#include "ecms/common.hpp"
#include "ecms/fem.hpp"
#include "ecms/linalg.hpp"
#include "ecms/mesh.hpp"

namespace ecms {

enum class Method { ritz, petrov };

std::string to_string(Method method);
Method method_from_string(const std::string &s);

/// Columns whose imaginary part carries more than this fraction of their norm
/// get a conjugate partner in the Ritz trial space.
inline constexpr double kConjugateThreshold = 1e-10;

/// Coarse effective equation. S = test^H K trial, kept sparse since every
/// column is supported on at most four coarse elements.
struct CoarseSystem {
  Method method = Method::ritz;
  SparseColMatrix trial;
  SparseColMatrix test;
  SparseMatrix S;
  int conjugate_columns = 0; ///< Ritz only: conj columns added before rank truncation
  int dropped_columns = 0;   ///< Ritz only: directions removed as dependent
  bool global_rank_check = false;

  int dim() const { return static_cast<int>(S.rows()); }
};

/// Directions of a Ritz column group whose energy falls below this fraction of
/// the group's largest one are dropped.
inline constexpr double kRitzRankTolerance = 1e-12;

/// Pivot threshold, relative to the largest Gram column, of the global rank
/// check.
inline constexpr double kRitzGlobalTolerance = 1e-8;

/// Petrov: trial = Phi, test = conj(Phi).
/// Ritz: trial = test = span(Phi, conj(Phi_j) for the complex columns). Each
/// group of columns sharing a support (one nodal function, or the functions
/// of one edge) is orthonormalized together with its conjugates in the energy
/// inner product G, dropping numerically dependent directions. If S is then
/// singular, a global rank check removes dependencies between groups.
CoarseSystem assemble_coarse(const SparseMatrix &K, const SparseMatrix &G, const TrialSpace &ts,
                             Method method);

struct OnlineSolution {
  Vector u;            ///< full fine solution
  Vector coefficients; ///< coarse unknowns
  double rcond = 0.0;
  double sigma_min = 0.0; ///< estimate of the smallest singular value of S
};

/// r = test^H (F - K offset), S c = r, u = trial c + offset, where offset
/// holds u^b + u^s (+ u^p) and the Dirichlet data.
OnlineSolution solve_online(const CoarseSystem &cs, const SparseMatrix &K, const Vector &F,
                            const Vector &offset);

/// Fine-grid L2 and energy norms used for relative errors.
class ErrorNorms {
public:
  ErrorNorms(const TwoLevelMesh &mesh, const CoefficientField &coeff);
  double l2(const Vector &u) const;
  double energy(const Vector &u) const;
  const SparseMatrix &mass() const { return M_; }
  const SparseMatrix &gram() const { return G_; }

private:
  SparseMatrix M_;
  SparseMatrix G_;
};

struct ErrorPair {
  double e_L2 = 0.0;
  double e_H = 0.0;
  bool absolute = false; ///< u_ref vanished, errors are absolute
};

ErrorPair compute_errors(const ErrorNorms &norms, const Vector &u_sol, const Vector &u_ref);

/// Energy-norm distance from w to span(U).
double best_approximation_error(const SparseMatrix &G, const SparseColMatrix &U, const Vector &w);

/// One row of a sweep.
struct SolveReport {
  std::string problem;
  Method method = Method::ritz;
  double k = 0.0;
  int nH = 0;
  int refine = 0;
  int m = 0;
  int coarse_dim = 0;
  double e_L2 = 0.0;
  double e_H = 0.0;
  double offline_sec = 0.0;
  double online_sec = 0.0;
  std::string flags;
};

} // namespace ecms
