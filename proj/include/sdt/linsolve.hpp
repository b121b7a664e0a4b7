#pragma once
/// @file linsolve.hpp
/// @brief Sparse direct linear solves with post-solve residual verification.

#include <Eigen/Sparse>

#include <memory>

namespace sdt {

/// LU factorization of a sparse square matrix, reusable across many solves.
/// Every solve checks ||Ax - b|| <= tol * max(1, ||b||), applying up to two
/// rounds of iterative refinement before reporting failure.
class SparseFactor {
 public:
  explicit SparseFactor(Eigen::SparseMatrix<double> matrix);

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs,
                        double residual_tol = 1e-10) const;

  Eigen::Index rows() const { return matrix_->rows(); }

 private:
  struct Impl;
  std::shared_ptr<const Eigen::SparseMatrix<double>> matrix_;
  std::shared_ptr<Impl> impl_;  // shared so the factorization is copyable
};

/// One-shot factor-and-solve.
Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& matrix,
                             const Eigen::VectorXd& rhs,
                             double residual_tol = 1e-10);

}  // namespace sdt
