#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace ecms {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Compressed-row complex matrix used for all fine-grid forms.
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, int>;
/// Column-major variant used for basis matrices (one column per basis function).
using SparseColMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<Complex, int>;

inline constexpr Complex I{0.0, 1.0};

/// Malformed input: invalid grid, bad boundary tiling, bad config.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical stage failed (singular factorization, ill-conditioned Gram, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SingularSystemError : public NumericalError {
public:
  SingularSystemError(const std::string &where, double rcond)
      : NumericalError(where + ": singular or near-singular system (rcond=" +
                       std::to_string(rcond) + ")"),
        rcond_(rcond) {}
  double rcond() const { return rcond_; }

private:
  double rcond_;
};

} // namespace ecms
