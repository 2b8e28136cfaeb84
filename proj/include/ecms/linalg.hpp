#pragma once

#include <memory>
#include <string>

#include "ecms/common.hpp"

namespace ecms {

/// Sparse complex LU (UMFPACK) of a square matrix. The factors are kept so any
/// number of right-hand sides can be solved without refactorization.
class SparseFactorization {
public:
  /// Pivots below `pivot_tolerance` relative to the largest pivot are reported
  /// as a SingularSystemError tagged with `context`.
  explicit SparseFactorization(const SparseMatrix &K, std::string context = "sparse LU",
                               double pivot_tolerance = 1e-14);
  ~SparseFactorization();
  SparseFactorization(SparseFactorization &&) noexcept;
  SparseFactorization &operator=(SparseFactorization &&) noexcept;
  SparseFactorization(const SparseFactorization &) = delete;
  SparseFactorization &operator=(const SparseFactorization &) = delete;

  int size() const;
  /// Reciprocal pivot ratio min|u_ii| / max|u_ii| reported by the factorization.
  double rcond() const;

  Vector solve(const Vector &b) const;
  Matrix solve(const Matrix &B) const;
  /// Solves K^H x = b with the same factors.
  Vector solve_adjoint(const Vector &b) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Generalized Hermitian eigenproblem M g = lambda G g with M PSD, G PD.
struct HermitianGEVP {
  Matrix M;
  Matrix G;
};

struct EigenPairs {
  RealVector values; ///< descending
  Matrix vectors;    ///< G-orthonormal columns
  bool regularized = false;
};

/// Top-m eigenpairs through a Cholesky reduction of G. If G is not numerically
/// positive definite, mu * trace(G)/dim * I (mu = 1e-12) is added once.
EigenPairs top_eigenpairs(const HermitianGEVP &problem, int m);

/// Relative Hermitian defect max|A - A^H| / max|A|.
double hermitian_defect(const Matrix &A);

/// Estimate of the smallest singular value of the factorized matrix by power
/// iteration on S^{-H} S^{-1}.
double smallest_singular_value(const SparseFactorization &lu, int iterations = 30);

} // namespace ecms
