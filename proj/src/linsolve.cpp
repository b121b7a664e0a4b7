/// @file linsolve.cpp
/// @brief UMFPACK-backed sparse LU with residual checking and refinement.

#include "sdt/linsolve.hpp"

#include <Eigen/UmfPackSupport>

#include <cstdio>
#include <stdexcept>

namespace sdt {

struct SparseFactor::Impl {
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu;
};

SparseFactor::SparseFactor(Eigen::SparseMatrix<double> matrix) {
  if (matrix.rows() != matrix.cols())
    throw std::invalid_argument("SparseFactor: matrix must be square");
  matrix.makeCompressed();
  matrix_ = std::make_shared<const Eigen::SparseMatrix<double>>(std::move(matrix));
  impl_ = std::make_shared<Impl>();
  if (matrix_->rows() == 0) return;
  impl_->lu.compute(*matrix_);
  if (impl_->lu.info() != Eigen::Success)
    throw std::runtime_error(
        "sparse LU factorization failed (matrix is singular or ill-posed)");
}

Eigen::VectorXd SparseFactor::solve(const Eigen::VectorXd& rhs,
                                    double residual_tol) const {
  if (rhs.size() != matrix_->rows())
    throw std::invalid_argument("SparseFactor::solve: size mismatch");
  if (matrix_->rows() == 0) return Eigen::VectorXd();

  Eigen::VectorXd x = impl_->lu.solve(rhs);
  const double scale = std::max(1.0, rhs.norm());
  double residual = (rhs - (*matrix_) * x).norm();
  for (int round = 0; round < 2 && residual > residual_tol * scale; ++round) {
    const Eigen::VectorXd r = rhs - (*matrix_) * x;
    const Eigen::VectorXd correction = impl_->lu.solve(r);
    x += correction;
    residual = (rhs - (*matrix_) * x).norm();
  }
  if (residual > residual_tol * scale) {
    char msg[128];
    std::snprintf(msg, sizeof(msg),
                  "sparse solve residual %.3e exceeds tolerance %.3e",
                  residual / scale, residual_tol);
    throw std::runtime_error(msg);
  }
  return x;
}

Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& matrix,
                             const Eigen::VectorXd& rhs, double residual_tol) {
  return SparseFactor(matrix).solve(rhs, residual_tol);
}

}  // namespace sdt
