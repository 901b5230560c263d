#include "wbc/linalg.hpp"

namespace wbc {

SquarePseudoInverse::SquarePseudoInverse(Eigen::Index size, double tolerance) : tolerance_(tolerance) {
  resize(size);
}

void SquarePseudoInverse::resize(Eigen::Index size) {
  size_ = size;
  svd_ = Eigen::JacobiSVD<Matrix, Eigen::NoQRPreconditioner>(size, size, Eigen::ComputeFullU | Eigen::ComputeFullV);
  inverseSigma_.setZero(size);
  scaledV_.setZero(size, size);
}

void SquarePseudoInverse::compute(const Matrix& input, Matrix& output) {
  if (size_ == 0) {
    rank_ = 0;
    return;
  }
  svd_.compute(input);
  const Vector& sigma = svd_.singularValues();
  const double sigmaMax = sigma(0);
  rank_ = 0;
  for (Eigen::Index i = 0; i < size_; ++i) {
    if (sigmaMax > 0.0 && sigma(i) >= tolerance_ * sigmaMax) {
      inverseSigma_(i) = 1.0 / sigma(i);
      ++rank_;
    } else {
      inverseSigma_(i) = 0.0;
    }
  }
  scaledV_.noalias() = svd_.matrixV() * inverseSigma_.asDiagonal();
  output.noalias() = scaledV_ * svd_.matrixU().transpose();
}

Matrix pseudoInverse(const Matrix& m, double tolerance) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  Vector inv = Vector::Zero(sigma.size());
  const double sigmaMax = sigma.size() ? sigma(0) : 0.0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigmaMax > 0.0 && sigma(i) >= tolerance * sigmaMax) inv(i) = 1.0 / sigma(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Eigen::Index numericalRank(const Matrix& m, double tolerance) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sigma = svd.singularValues();
  if (sigma(0) <= 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) >= tolerance * sigma(0)) ++rank;
  }
  return rank;
}

DynamicallyConsistentInverse::DynamicallyConsistentInverse(Eigen::Index rows, Eigen::Index cols, double tolerance)
    : pinv_(0, tolerance) {
  resize(rows, cols);
}

void DynamicallyConsistentInverse::resize(Eigen::Index rows, Eigen::Index cols) {
  ainvXt_.setZero(cols, rows);
  weighted_.setZero(rows, rows);
  weightedInverse_.setZero(rows, rows);
  pinv_.resize(rows);
}

void DynamicallyConsistentInverse::compute(const Matrix& x, const Matrix& ainv, Matrix& out) {
  ainvXt_.noalias() = ainv * x.transpose();
  weighted_.noalias() = x * ainvXt_;
  pinv_.compute(weighted_, weightedInverse_);
  out.noalias() = ainvXt_ * weightedInverse_;
}

Matrix dynConsistentPinv(const Matrix& x, const Matrix& ainv, double tolerance) {
  DynamicallyConsistentInverse inverse(x.rows(), x.cols(), tolerance);
  Matrix out(x.cols(), x.rows());
  if (x.rows() == 0) return out;
  inverse.compute(x, ainv, out);
  return out;
}

}  // namespace wbc
