#include "ecms/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <umfpack.h>

namespace ecms {

// UMFPACK is column oriented. The CSR arrays of K are handed over as the CSC
// arrays of K^T, so K x = b is solved with the array-transpose system.
struct SparseFactorization::Impl {
  int n = 0;
  std::vector<int> outer;
  std::vector<int> inner;
  std::vector<Complex> values;
  void *numeric = nullptr;
  double control[UMFPACK_CONTROL];
  double rcond = 0.0;

  ~Impl() {
    if (numeric)
      umfpack_zi_free_numeric(&numeric);
  }

  Vector run(int sys, const Vector &b) const {
    Vector x(n);
    double info[UMFPACK_INFO];
    const int status = umfpack_zi_solve(
        sys, outer.data(), inner.data(), reinterpret_cast<const double *>(values.data()), nullptr,
        reinterpret_cast<double *>(x.data()), nullptr, reinterpret_cast<const double *>(b.data()),
        nullptr, numeric, control, info);
    if (status < 0)
      throw NumericalError("UMFPACK solve failed with status " + std::to_string(status));
    return x;
  }
};

SparseFactorization::SparseFactorization(const SparseMatrix &K, std::string context,
                                         double pivot_tolerance)
    : impl_(std::make_unique<Impl>()) {
  if (K.rows() != K.cols())
    throw NumericalError(context + ": matrix is not square");
  if (K.rows() == 0)
    throw NumericalError(context + ": empty system");
  SparseMatrix Kc = K;
  Kc.makeCompressed();
  auto &d = *impl_;
  d.n = static_cast<int>(K.rows());
  d.outer.assign(Kc.outerIndexPtr(), Kc.outerIndexPtr() + d.n + 1);
  d.inner.assign(Kc.innerIndexPtr(), Kc.innerIndexPtr() + Kc.nonZeros());
  d.values.assign(Kc.valuePtr(), Kc.valuePtr() + Kc.nonZeros());
  umfpack_zi_defaults(d.control);
  // Direct solves only; the residual checks in the tests cover accuracy.
  d.control[UMFPACK_IRSTEP] = 0;

  double info[UMFPACK_INFO];
  void *symbolic = nullptr;
  const auto *ax = reinterpret_cast<const double *>(d.values.data());
  int status = umfpack_zi_symbolic(d.n, d.n, d.outer.data(), d.inner.data(), ax, nullptr, &symbolic,
                                   d.control, info);
  if (status < 0) {
    if (symbolic)
      umfpack_zi_free_symbolic(&symbolic);
    throw NumericalError(context + ": symbolic factorization failed (status " +
                         std::to_string(status) + ")");
  }
  status = umfpack_zi_numeric(d.outer.data(), d.inner.data(), ax, nullptr, symbolic, &d.numeric,
                              d.control, info);
  umfpack_zi_free_symbolic(&symbolic);
  d.rcond = info[UMFPACK_RCOND];
  if (status == UMFPACK_WARNING_singular_matrix || status < 0 || !(d.rcond >= pivot_tolerance))
    throw SingularSystemError(context, d.rcond);
}

SparseFactorization::~SparseFactorization() = default;
SparseFactorization::SparseFactorization(SparseFactorization &&) noexcept = default;
SparseFactorization &SparseFactorization::operator=(SparseFactorization &&) noexcept = default;

int SparseFactorization::size() const { return impl_->n; }
double SparseFactorization::rcond() const { return impl_->rcond; }

Vector SparseFactorization::solve(const Vector &b) const {
  if (b.size() != impl_->n)
    throw NumericalError("right-hand side size mismatch");
  return impl_->run(UMFPACK_Aat, b);
}

Matrix SparseFactorization::solve(const Matrix &B) const {
  Matrix X(B.rows(), B.cols());
  for (Eigen::Index c = 0; c < B.cols(); ++c)
    X.col(c) = solve(Vector(B.col(c)));
  return X;
}

Vector SparseFactorization::solve_adjoint(const Vector &b) const {
  if (b.size() != impl_->n)
    throw NumericalError("right-hand side size mismatch");
  // K^H x = b  <=>  K^T conj(x) = conj(b), and K^T is the stored matrix.
  return impl_->run(UMFPACK_A, b.conjugate()).conjugate();
}

double hermitian_defect(const Matrix &A) {
  const double scale = A.cwiseAbs().maxCoeff();
  if (scale == 0.0)
    return 0.0;
  return (A - A.adjoint()).cwiseAbs().maxCoeff() / scale;
}

EigenPairs top_eigenpairs(const HermitianGEVP &problem, int m) {
  const Eigen::Index dim = problem.G.rows();
  if (problem.M.rows() != dim || problem.M.cols() != dim || problem.G.cols() != dim)
    throw NumericalError("generalized eigenproblem: dimension mismatch");
  if (m < 0 || m > dim)
    throw NumericalError("generalized eigenproblem: requested " + std::to_string(m) +
                         " pairs of " + std::to_string(dim));
  EigenPairs out;
  Matrix G = 0.5 * (problem.G + problem.G.adjoint());
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() != Eigen::Success) {
    const double shift = 1e-12 * G.trace().real() / static_cast<double>(dim);
    G.diagonal().array() += shift;
    llt.compute(G);
    out.regularized = true;
    if (llt.info() != Eigen::Success)
      throw NumericalError("ill-conditioned Gram: Cholesky failed after regularization");
  }
  // C = L^{-1} M L^{-H}
  Matrix C = llt.matrixL().solve(problem.M);
  C = llt.matrixL().solve(C.adjoint()).adjoint();
  C = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
  if (eig.info() != Eigen::Success)
    throw NumericalError("Hermitian eigensolver did not converge");
  out.values.resize(m);
  Matrix Y(dim, m);
  for (int j = 0; j < m; ++j) {
    out.values(j) = eig.eigenvalues()(dim - 1 - j);
    Y.col(j) = eig.eigenvectors().col(dim - 1 - j);
  }
  out.vectors = llt.matrixU().solve(Y);
  return out;
}

double smallest_singular_value(const SparseFactorization &lu, int iterations) {
  const int n = lu.size();
  Vector x(n);
  for (int i = 0; i < n; ++i)
    x(i) = Complex(1.0 + 0.5 * std::sin(1.0 + i), 0.25 * std::cos(3.0 * i));
  x.normalize();
  double estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector z = lu.solve_adjoint(lu.solve(x));
    estimate = z.norm();
    if (!(estimate > 0.0) || !std::isfinite(estimate))
      return 0.0;
    x = z / estimate;
  }
  return 1.0 / std::sqrt(estimate);
}

} // namespace ecms
