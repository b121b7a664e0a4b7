/// @file basis.cpp
/// @brief Construction of nodal Lagrange bases via inverse Vandermonde.

#include "sdt/basis.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace sdt {

namespace {

constexpr int kMaxBasisDegree = 4;

double mono_eval(int a, int b, const Vec2& p) {
  double v = 1.0;
  for (int i = 0; i < a; ++i) v *= p.x;
  for (int i = 0; i < b; ++i) v *= p.y;
  return v;
}

/// Solve for monomial coefficients making the basis nodal (phi_i(node_j) =
/// delta_ij) and store them in the flat coeff array.
void finalize(ReferenceBasis& basis) {
  const int n = basis.size();
  Eigen::MatrixXd V(n, n);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m)
      V(j, m) = mono_eval(basis.monomials[static_cast<size_t>(m)].first,
                          basis.monomials[static_cast<size_t>(m)].second,
                          basis.nodes[static_cast<size_t>(j)]);
  Eigen::MatrixXd C = V.fullPivLu().inverse();  // C(m,i): phi_i = sum_m C(m,i) x^a y^b
  basis.coeff.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i)
      basis.coeff[static_cast<size_t>(m) * static_cast<size_t>(n) +
                  static_cast<size_t>(i)] = C(m, i);
}

}  // namespace

void ReferenceBasis::eval(const Vec2& p, std::vector<double>& values) const {
  const int n = size();
  values.assign(static_cast<size_t>(n), 0.0);
  for (int m = 0; m < n; ++m) {
    const double mono = mono_eval(monomials[static_cast<size_t>(m)].first,
                                  monomials[static_cast<size_t>(m)].second, p);
    for (int i = 0; i < n; ++i)
      values[static_cast<size_t>(i)] +=
          coeff[static_cast<size_t>(m) * static_cast<size_t>(n) +
                static_cast<size_t>(i)] *
          mono;
  }
}

void ReferenceBasis::eval_grad(const Vec2& p, std::vector<Vec2>& grads) const {
  const int n = size();
  grads.assign(static_cast<size_t>(n), Vec2{});
  for (int m = 0; m < n; ++m) {
    const int a = monomials[static_cast<size_t>(m)].first;
    const int b = monomials[static_cast<size_t>(m)].second;
    const double dx = a > 0 ? a * mono_eval(a - 1, b, p) : 0.0;
    const double dy = b > 0 ? b * mono_eval(a, b - 1, p) : 0.0;
    for (int i = 0; i < n; ++i) {
      const double c = coeff[static_cast<size_t>(m) * static_cast<size_t>(n) +
                             static_cast<size_t>(i)];
      grads[static_cast<size_t>(i)].x += c * dx;
      grads[static_cast<size_t>(i)].y += c * dy;
    }
  }
}

ReferenceBasis triangle_basis(int degree) {
  if (degree < 0 || degree > kMaxBasisDegree)
    throw std::invalid_argument("triangle_basis: degree must lie in [0,4]");
  ReferenceBasis basis;
  basis.degree = degree;
  basis.dim = 2;
  if (degree == 0) {
    basis.nodes = {Vec2{1.0 / 3.0, 1.0 / 3.0}};
    basis.monomials = {{0, 0}};
  } else {
    for (int j = 0; j <= degree; ++j)
      for (int i = 0; i <= degree - j; ++i)
        basis.nodes.emplace_back(static_cast<double>(i) / degree,
                                 static_cast<double>(j) / degree);
    for (int d = 0; d <= degree; ++d)
      for (int a = d; a >= 0; --a) basis.monomials.emplace_back(a, d - a);
  }
  finalize(basis);
  return basis;
}

ReferenceBasis segment_basis(int degree) {
  if (degree < 0 || degree > kMaxBasisDegree)
    throw std::invalid_argument("segment_basis: degree must lie in [0,4]");
  ReferenceBasis basis;
  basis.degree = degree;
  basis.dim = 1;
  if (degree == 0) {
    basis.nodes = {Vec2{0.5, 0.0}};
    basis.monomials = {{0, 0}};
  } else {
    for (int i = 0; i <= degree; ++i)
      basis.nodes.emplace_back(static_cast<double>(i) / degree, 0.0);
    for (int a = 0; a <= degree; ++a) basis.monomials.emplace_back(a, 0);
  }
  finalize(basis);
  return basis;
}

std::pair<std::vector<double>, std::vector<Vec2>> eval_basis(
    const ReferenceBasis& basis, const Vec2& point) {
  std::vector<double> values;
  std::vector<Vec2> grads;
  basis.eval(point, values);
  basis.eval_grad(point, grads);
  return {std::move(values), std::move(grads)};
}

}  // namespace sdt
