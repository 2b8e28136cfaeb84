#include "ecms/galerkin.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>

namespace ecms {

std::string to_string(Method method) { return method == Method::ritz ? "ritz" : "petrov"; }

Method method_from_string(const std::string &s) {
  if (s == "ritz" || s == "Ritz")
    return Method::ritz;
  if (s == "petrov" || s == "Petrov")
    return Method::petrov;
  throw ConfigError("unknown method '" + s + "' (expected ritz or petrov)");
}

namespace {

double relative_imaginary_mass(const SparseColMatrix &Phi, int col) {
  double re = 0.0, im = 0.0;
  for (SparseColMatrix::InnerIterator it(Phi, col); it; ++it) {
    re += std::norm(it.value().real());
    im += std::norm(it.value().imag());
  }
  const double total = re + im;
  return total > 0.0 ? std::sqrt(im / total) : 0.0;
}

} // namespace

namespace {

// Orthonormal basis, in the energy inner product, of span(P, conj(P)) for one
// group of columns with a common support. Appends the result to `triplets`.
int ritz_group(const SparseColMatrix &Phi, const SparseMatrix &G, int first, int count, int col,
               std::vector<Triplet> &triplets, int &conjugates) {
  std::vector<int> complex_cols;
  for (int c = first; c < first + count; ++c)
    if (relative_imaginary_mass(Phi, c) > kConjugateThreshold)
      complex_cols.push_back(c);
  if (complex_cols.empty()) {
    for (int c = first; c < first + count; ++c, ++col)
      for (SparseColMatrix::InnerIterator it(Phi, c); it; ++it)
        triplets.emplace_back(static_cast<int>(it.row()), col, it.value());
    return count;
  }
  conjugates += static_cast<int>(complex_cols.size());

  std::vector<int> rows;
  for (int c = first; c < first + count; ++c)
    for (SparseColMatrix::InnerIterator it(Phi, c); it; ++it)
      rows.push_back(static_cast<int>(it.row()));
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  auto local_row = [&](int r) {
    return static_cast<Eigen::Index>(std::lower_bound(rows.begin(), rows.end(), r) - rows.begin());
  };

  const auto q = static_cast<Eigen::Index>(count + complex_cols.size());
  Matrix Q = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), q);
  for (int c = first; c < first + count; ++c)
    for (SparseColMatrix::InnerIterator it(Phi, c); it; ++it)
      Q(local_row(static_cast<int>(it.row())), c - first) = it.value();
  for (std::size_t a = 0; a < complex_cols.size(); ++a)
    Q.col(count + static_cast<Eigen::Index>(a)) = Q.col(complex_cols[a] - first).conjugate();

  Matrix Gs = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (SparseMatrix::InnerIterator it(G, rows[a]); it; ++it) {
      const auto b = std::lower_bound(rows.begin(), rows.end(), static_cast<int>(it.col()));
      if (b != rows.end() && *b == it.col())
        Gs(static_cast<Eigen::Index>(a), b - rows.begin()) = it.value();
    }
  Matrix gram = Q.adjoint() * Gs * Q;
  gram = 0.5 * (gram + gram.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalError("Ritz space: eigensolver failed");
  const double top = eig.eigenvalues().maxCoeff();
  int kept = 0;
  for (Eigen::Index j = q - 1; j >= 0; --j) {
    const double lambda = eig.eigenvalues()(j);
    if (!(lambda > kRitzRankTolerance * top))
      break;
    Vector v = Q * eig.eigenvectors().col(j) / std::sqrt(lambda);
    normalize_phase(v);
    for (std::size_t a = 0; a < rows.size(); ++a)
      if (v(static_cast<Eigen::Index>(a)) != 0.0)
        triplets.emplace_back(rows[a], col, v(static_cast<Eigen::Index>(a)));
    ++col;
    ++kept;
  }
  return kept;
}

// Conjugates of neighbouring groups can still be dependent once the edge
// spaces are complete: conj(phi) then differs from a harmonic function by a
// bubble that is linear in the trace, and the bubbles of all groups touching a
// Robin element share one small space. A threshold-pivoted QR of the energy
// Gram finds those columns.
SparseColMatrix drop_global_dependencies(const SparseColMatrix &U, const SparseMatrix &G) {
  SparseColMatrix gram = SparseColMatrix(U.adjoint()) * (SparseColMatrix(G) * U);
  gram = 0.5 * (gram + SparseColMatrix(gram.adjoint()));
  gram.makeCompressed();
  double top = 0.0;
  for (Eigen::Index c = 0; c < gram.cols(); ++c)
    top = std::max(top, gram.col(c).norm());
  Eigen::SparseQR<SparseColMatrix, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(kRitzGlobalTolerance * top);
  qr.compute(gram);
  if (qr.info() != Eigen::Success)
    throw NumericalError("Ritz space: rank check failed");
  const Eigen::Index rank = qr.rank();
  if (rank == U.cols())
    return U;
  std::vector<int> keep;
  for (Eigen::Index j = 0; j < rank; ++j)
    keep.push_back(qr.colsPermutation().indices()(j));
  std::sort(keep.begin(), keep.end());
  SparseColMatrix out(U.rows(), static_cast<Eigen::Index>(keep.size()));
  std::vector<Triplet> triplets;
  for (std::size_t j = 0; j < keep.size(); ++j)
    for (SparseColMatrix::InnerIterator it(U, keep[j]); it; ++it)
      triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(j), it.value());
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

SparseMatrix compress(const SparseMatrix &K, const SparseColMatrix &trial,
                      const SparseColMatrix &test) {
  const SparseColMatrix KU = SparseColMatrix(K) * trial;
  const SparseColMatrix testH = test.adjoint();
  SparseMatrix S(testH * KU);
  S.makeCompressed();
  return S;
}

bool factorizes(const SparseMatrix &S) {
  try {
    SparseFactorization lu(S, "coarse system");
    return true;
  } catch (const SingularSystemError &) {
    return false;
  }
}

} // namespace

CoarseSystem assemble_coarse(const SparseMatrix &K, const SparseMatrix &G, const TrialSpace &ts,
                             Method method) {
  const SparseColMatrix &Phi = ts.Phi;
  if (K.rows() != Phi.rows() || G.rows() != Phi.rows())
    throw NumericalError("trial space does not match the fine system");
  CoarseSystem cs;
  cs.method = method;
  if (method == Method::petrov) {
    cs.trial = Phi;
    cs.test = Phi.conjugate();
  } else {
    std::vector<Triplet> triplets;
    triplets.reserve(Phi.nonZeros() * 2);
    int col = 0;
    const int ncols = static_cast<int>(Phi.cols());
    for (int c = 0; c < ncols;) {
      int count = 1;
      if (ts.column_edge[c] >= 0)
        while (c + count < ncols && ts.column_edge[c + count] == ts.column_edge[c])
          ++count;
      col += ritz_group(Phi, G, c, count, col, triplets, cs.conjugate_columns);
      c += count;
    }
    cs.trial.resize(Phi.rows(), col);
    cs.trial.setFromTriplets(triplets.begin(), triplets.end());
    cs.trial.makeCompressed();
    cs.test = cs.trial;
  }
  cs.S = compress(K, cs.trial, cs.test);
  if (method == Method::ritz && !factorizes(cs.S)) {
    cs.trial = drop_global_dependencies(cs.trial, G);
    cs.test = cs.trial;
    cs.S = compress(K, cs.trial, cs.test);
    cs.global_rank_check = true;
  }
  if (method == Method::ritz)
    cs.dropped_columns =
        static_cast<int>(Phi.cols()) + cs.conjugate_columns - static_cast<int>(cs.trial.cols());
  return cs;
}

OnlineSolution solve_online(const CoarseSystem &cs, const SparseMatrix &K, const Vector &F,
                            const Vector &offset) {
  const Vector r = cs.test.adjoint() * (F - K * offset);
  SparseFactorization lu(cs.S, "coarse system");
  OnlineSolution out;
  out.coefficients = lu.solve(r);
  out.u = cs.trial * out.coefficients + offset;
  out.rcond = lu.rcond();
  out.sigma_min = smallest_singular_value(lu);
  return out;
}

ErrorNorms::ErrorNorms(const TwoLevelMesh &mesh, const CoefficientField &coeff)
    : M_(assemble_mass(mesh, mesh.full_rect())),
      G_(assemble_energy_gram(mesh, coeff, mesh.full_rect())) {}

double ErrorNorms::l2(const Vector &u) const { return std::sqrt(std::max(0.0, quadratic_form(M_, u))); }

double ErrorNorms::energy(const Vector &u) const {
  return std::sqrt(std::max(0.0, quadratic_form(G_, u)));
}

ErrorPair compute_errors(const ErrorNorms &norms, const Vector &u_sol, const Vector &u_ref) {
  const Vector diff = u_ref - u_sol;
  ErrorPair out;
  const double ref_l2 = norms.l2(u_ref), ref_h = norms.energy(u_ref);
  if (ref_l2 == 0.0 || ref_h == 0.0) {
    out.absolute = true;
    out.e_L2 = norms.l2(diff);
    out.e_H = norms.energy(diff);
    return out;
  }
  out.e_L2 = norms.l2(diff) / ref_l2;
  out.e_H = norms.energy(diff) / ref_h;
  return out;
}

double best_approximation_error(const SparseMatrix &G, const SparseColMatrix &U, const Vector &w) {
  const SparseColMatrix GU = SparseColMatrix(G) * U;
  const SparseColMatrix UH = U.adjoint();
  SparseColMatrix gram = UH * GU;
  gram = 0.5 * (gram + SparseColMatrix(gram.adjoint()));
  Eigen::SimplicialLDLT<SparseColMatrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success)
    throw NumericalError("energy Gram of the trial space is singular");
  const Vector rhs = UH * (G * w);
  const Vector c = ldlt.solve(rhs);
  const Vector e = w - U * c;
  return std::sqrt(std::max(0.0, quadratic_form(G, e)));
}

} // namespace ecms
