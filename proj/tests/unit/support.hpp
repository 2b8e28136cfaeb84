#pragma once

#include <random>

#include "ecms/common.hpp"
#include "ecms/mesh.hpp"

namespace ecms::test {

inline Vector random_vector(Eigen::Index n, std::mt19937_64 &rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i)
    v(i) = Complex(g(rng), g(rng));
  return v;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    m.col(c) = random_vector(rows, rng);
  return m;
}

inline BoundaryClassification mixed_bc() {
  BoundaryClassification bc;
  bc.segments = {{Side::bottom, 0.0, 1.0, BoundaryKind::dirichlet},
                 {Side::top, 0.0, 1.0, BoundaryKind::neumann},
                 {Side::left, 0.0, 1.0, BoundaryKind::robin},
                 {Side::right, 0.0, 1.0, BoundaryKind::robin}};
  return bc;
}

inline Matrix dense(const SparseMatrix &A) { return Matrix(A); }

inline double max_abs(const Vector &v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

} // namespace ecms::test
