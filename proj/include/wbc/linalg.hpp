#pragma once

#include <Eigen/SVD>

#include "wbc/common.hpp"

namespace wbc {

/// Singular values below this fraction of the largest one are treated as zero.
inline constexpr double kDefaultPinvTolerance = 1e-4;

/// Preallocated SVD pseudo-inverse of square matrices.
///
/// compute() performs no heap allocation as long as the input keeps the size
/// given at construction. Singular values sigma < tolerance * sigma_max are
/// zeroed; an all-zero input yields an all-zero inverse.
class SquarePseudoInverse {
 public:
  explicit SquarePseudoInverse(Eigen::Index size = 0, double tolerance = kDefaultPinvTolerance);

  void resize(Eigen::Index size);
  void setTolerance(double tolerance) { tolerance_ = tolerance; }
  double tolerance() const { return tolerance_; }
  Eigen::Index size() const { return size_; }

  void compute(const Matrix& input, Matrix& output);

  /// Rank of the most recent input under the tolerance.
  Eigen::Index rank() const { return rank_; }

 private:
  Eigen::Index size_ = 0;
  double tolerance_;
  Eigen::Index rank_ = 0;
  Eigen::JacobiSVD<Matrix, Eigen::NoQRPreconditioner> svd_;
  Vector inverseSigma_;
  Matrix scaledV_;
};

/// Tolerant pseudo-inverse of an arbitrary matrix. Allocates; intended for
/// setup code and tests.
Matrix pseudoInverse(const Matrix& m, double tolerance = kDefaultPinvTolerance);

/// Numerical rank from the SVD with the same relative tolerance rule.
Eigen::Index numericalRank(const Matrix& m, double tolerance = 1e-9);

/// Dynamically consistent generalized inverse: Ainv X^T (X Ainv X^T)^+.
/// Allocating convenience wrapper around DynamicallyConsistentInverse.
Matrix dynConsistentPinv(const Matrix& x, const Matrix& ainv, double tolerance = kDefaultPinvTolerance);

/// Preallocated form of dynConsistentPinv for fixed m x n inputs.
class DynamicallyConsistentInverse {
 public:
  DynamicallyConsistentInverse() = default;
  DynamicallyConsistentInverse(Eigen::Index rows, Eigen::Index cols, double tolerance = kDefaultPinvTolerance);

  void resize(Eigen::Index rows, Eigen::Index cols);
  void setTolerance(double tolerance) { pinv_.setTolerance(tolerance); }

  /// Writes Ainv X^T (X Ainv X^T)^+ into out (cols x rows). Also leaves
  /// X Ainv X^T in weighted() for callers that need it.
  void compute(const Matrix& x, const Matrix& ainv, Matrix& out);

  const Matrix& weighted() const { return weighted_; }

 private:
  Matrix ainvXt_;
  Matrix weighted_;
  Matrix weightedInverse_;
  SquarePseudoInverse pinv_;
};

}  // namespace wbc
