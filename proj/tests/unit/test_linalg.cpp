#include <doctest.h>

#include <algorithm>

#include <Eigen/Eigenvalues>

#include "ecms/linalg.hpp"
#include "support.hpp"

using namespace ecms;

namespace {

SparseMatrix to_sparse(const Matrix &A) {
  SparseMatrix S = A.sparseView();
  S.makeCompressed();
  return S;
}

Matrix random_hpd(int n, std::mt19937_64 &rng) {
  const Matrix B = test::random_matrix(n, n, rng);
  return B.adjoint() * B + n * Matrix::Identity(n, n);
}

Matrix random_hpsd(int n, int rank, std::mt19937_64 &rng) {
  const Matrix B = test::random_matrix(rank, n, rng);
  return B.adjoint() * B;
}

// Eigenvalues of G^{-1} M by a general (non-Hermitian) eigensolver, sorted descending.
RealVector brute_force_values(const Matrix &M, const Matrix &G) {
  const Matrix C = G.fullPivLu().solve(M);
  Eigen::ComplexEigenSolver<Matrix> es(C);
  RealVector v = es.eigenvalues().real();
  std::sort(v.data(), v.data() + v.size(), std::greater<>());
  return v;
}

} // namespace

TEST_CASE("sparse LU small systems") {
  const SparseFactorization id(to_sparse(Matrix::Identity(5, 5)));
  std::mt19937_64 rng(3);
  const Vector b = test::random_vector(5, rng);
  CHECK((id.solve(b) - b).norm() == 0.0);

  Matrix A(2, 2);
  A << 2, 1, 1, 2;
  const SparseFactorization lu(to_sparse(A));
  const Vector x = lu.solve(Vector(Vector::Constant(2, 3.0)));
  CHECK(std::abs(x(0) - 1.0) < 1e-15);
  CHECK(std::abs(x(1) - 1.0) < 1e-15);
  CHECK(lu.size() == 2);
}

TEST_CASE("sparse LU agrees with a dense solver") {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix A = Matrix::Zero(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j)
      if (i == j || u(rng) < 0.1)
        A(i, j) = Complex(u(rng) - 0.5, u(rng) - 0.5);
  A.diagonal().array() += 4.0;
  const SparseFactorization lu(to_sparse(A));
  const Vector b = test::random_vector(50, rng);
  const Vector x = lu.solve(b);
  const Vector oracle = A.fullPivLu().solve(b);
  CHECK((x - oracle).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((A * x - b).norm() <= 1e-10 * b.norm());

  const Vector xa = lu.solve_adjoint(b);
  CHECK((A.adjoint() * xa - b).norm() <= 1e-10 * b.norm());

  const Matrix B = test::random_matrix(50, 3, rng);
  const Matrix X = lu.solve(B);
  CHECK((A * X - B).norm() <= 1e-10 * B.norm());
}

TEST_CASE("sparse LU reports singular systems") {
  Matrix A = Matrix::Identity(4, 4);
  A(2, 2) = 0.0;
  A(2, 1) = 1.0;
  A(1, 2) = 0.0;
  A.row(2).setZero();
  CHECK_THROWS_AS(SparseFactorization(to_sparse(A), "test"), SingularSystemError);
  CHECK_THROWS_AS(SparseFactorization(to_sparse(Matrix::Zero(2, 3))), NumericalError);
}

TEST_CASE("smallest singular value estimate") {
  std::mt19937_64 rng(8);
  const Matrix Q = test::random_matrix(12, 12, rng).householderQr().householderQ();
  RealVector s = RealVector::LinSpaced(12, 1.0, 12.0);
  s(5) = 0.01;
  const Matrix A = Q * s.cast<Complex>().asDiagonal() * Q.adjoint();
  const SparseFactorization lu(to_sparse(A));
  CHECK(smallest_singular_value(lu) == doctest::Approx(0.01).epsilon(1e-6));
}

TEST_CASE("top eigenpairs on diagonal examples") {
  const EigenPairs id = top_eigenpairs({Matrix::Identity(4, 4), Matrix::Identity(4, 4)}, 4);
  for (int j = 0; j < 4; ++j)
    CHECK(id.values(j) == doctest::Approx(1.0).epsilon(1e-14));

  Matrix M = Matrix::Zero(2, 2);
  M(0, 0) = 4.0;
  M(1, 1) = 1.0;
  const EigenPairs d = top_eigenpairs({M, Matrix::Identity(2, 2)}, 2);
  CHECK(d.values(0) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(d.values(1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(d.vectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(d.vectors(1, 0)) < 1e-14);
  CHECK(std::abs(d.vectors(1, 1)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_FALSE(d.regularized);
}

TEST_CASE("top eigenpairs against a full-spectrum oracle") {
  std::mt19937_64 rng(20);
  const int n = 20;
  const Matrix M = random_hpsd(n, 14, rng);
  const Matrix G = random_hpd(n, rng);
  const EigenPairs p = top_eigenpairs({M, G}, n);
  const RealVector oracle = brute_force_values(M, G);
  for (int j = 0; j < n; ++j)
    CHECK(std::abs(p.values(j) - oracle(j)) <= 1e-10 * oracle(0));
  for (int j = 1; j < n; ++j)
    CHECK(p.values(j) <= p.values(j - 1));

  const double Mnorm = M.norm();
  for (int j = 0; j < n; ++j) {
    const Vector g = p.vectors.col(j);
    CHECK((M * g - p.values(j) * (G * g)).norm() <= 1e-8 * Mnorm);
  }
  const Matrix gram = p.vectors.adjoint() * G * p.vectors;
  CHECK((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() <= 1e-8);

  const EigenPairs top3 = top_eigenpairs({M, G}, 3);
  CHECK(top3.vectors.cols() == 3);
  for (int j = 0; j < 3; ++j)
    CHECK(top3.values(j) == doctest::Approx(p.values(j)).epsilon(1e-12));
}

TEST_CASE("eigenvalues are invariant under congruence") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4 + trial;
    const Matrix M = random_hpsd(n, n, rng);
    const Matrix G = random_hpd(n, rng);
    const Matrix C = test::random_matrix(n, n, rng) + 3.0 * Matrix::Identity(n, n);
    const EigenPairs a = top_eigenpairs({M, G}, n);
    const EigenPairs b = top_eigenpairs({C.adjoint() * M * C, C.adjoint() * G * C}, n);
    for (int j = 0; j < n; ++j)
      CHECK(std::abs(a.values(j) - b.values(j)) <= 1e-10 * a.values(0));
  }
}

TEST_CASE("singular Gram is regularized once") {
  std::mt19937_64 rng(5);
  Matrix G = Matrix::Zero(6, 6);
  G.topLeftCorner(5, 5) = random_hpd(5, rng);
  const Matrix M = random_hpsd(6, 3, rng);
  const EigenPairs p = top_eigenpairs({M, G}, 2);
  CHECK(p.regularized);
  CHECK_THROWS_AS(top_eigenpairs({M, G}, 7), NumericalError);
}

TEST_CASE("Hermitian defect") {
  std::mt19937_64 rng(9);
  const Matrix H = random_hpd(5, rng);
  CHECK(hermitian_defect(H) <= 1e-15);
  Matrix A = H;
  A(0, 1) += 1.0;
  CHECK(hermitian_defect(A) > 1e-3);
}
