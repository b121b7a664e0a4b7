/// @file test_linsolve.cpp
/// @brief Sparse direct solver: known solutions, saddle points, failure modes.

#include "doctest.h"
#include "sdt/linsolve.hpp"

#include <random>
#include <vector>

using namespace sdt;

namespace {

Eigen::SparseMatrix<double> tridiagonal(int n, double diag, double off) {
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, diag);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, off);
      t.emplace_back(i + 1, i, off);
    }
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

TEST_CASE("solves a discrete Laplacian against a manufactured solution") {
  const int n = 200;
  const Eigen::SparseMatrix<double> A = tridiagonal(n, 2.0, -1.0);
  std::mt19937 gen(31u);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x_exact(n);
  for (int i = 0; i < n; ++i) x_exact(i) = u(gen);
  const Eigen::VectorXd b = A * x_exact;
  const Eigen::VectorXd x = solve_sparse(A, b);
  CHECK((x - x_exact).norm() <= 1e-10 * x_exact.norm());
}

TEST_CASE("factorization is reusable across right-hand sides") {
  const int n = 50;
  const SparseFactor factor(tridiagonal(n, 4.0, 1.0));
  const Eigen::SparseMatrix<double> A = tridiagonal(n, 4.0, 1.0);
  std::mt19937 gen(37u);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = u(gen);
    const Eigen::VectorXd x = factor.solve(b);
    CHECK((A * x - b).norm() <= 1e-10 * std::max(1.0, b.norm()));
  }
}

TEST_CASE("handles indefinite saddle-point blocks") {
  // [[A  B^T], [B  0]] with A SPD: the structure of the coupled flow system.
  const int n = 20;
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 3.0);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, -1.0);
      t.emplace_back(i + 1, i, -1.0);
    }
  }
  for (int i = 0; i < n / 2; ++i) {
    t.emplace_back(n + i, 2 * i, 1.0);
    t.emplace_back(2 * i, n + i, 1.0);
    t.emplace_back(n + i, 2 * i + 1, -1.0);
    t.emplace_back(2 * i + 1, n + i, -1.0);
  }
  Eigen::SparseMatrix<double> A(n + n / 2, n + n / 2);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd x_exact = Eigen::VectorXd::LinSpaced(n + n / 2, -1.0, 2.0);
  const Eigen::VectorXd b = A * x_exact;
  const Eigen::VectorXd x = solve_sparse(A, b);
  CHECK((x - x_exact).norm() <= 1e-9 * x_exact.norm());
}

TEST_CASE("singular matrices are reported, not silently solved") {
  Eigen::SparseMatrix<double> A(3, 3);
  std::vector<Eigen::Triplet<double>> t = {{0, 0, 1.0}, {1, 1, 1.0}};
  A.setFromTriplets(t.begin(), t.end());  // third row/column identically zero
  CHECK_THROWS(solve_sparse(A, Eigen::VectorXd::Ones(3)));
}

TEST_CASE("shape mismatches are rejected") {
  const SparseFactor factor(tridiagonal(4, 2.0, -1.0));
  CHECK_THROWS(factor.solve(Eigen::VectorXd::Ones(5)));
  Eigen::SparseMatrix<double> rect(3, 4);
  CHECK_THROWS(SparseFactor(rect));
}
