/// @file quadrature.cpp
/// @brief Gauss-Legendre segment rules and collapsed-product triangle rules.

#include "sdt/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace sdt {

namespace {

constexpr int kMaxDegree = 20;

/// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
/// three-term recurrence; standard accuracy ~1e-15 for the sizes used here.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(static_cast<size_t>(n));
  w.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess for the i-th root (descending order).
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * xi * p1 - j * p2) / (j + 1.0);
      }
      // p0 = P_n(xi); derivative from the recurrence.
      pp = n * (xi * p0 - p1) / (xi * xi - 1.0);
      const double dx = p0 / pp;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[static_cast<size_t>(i)] = xi;
    w[static_cast<size_t>(i)] = 2.0 / ((1.0 - xi * xi) * pp * pp);
  }
}

void check_degree(int degree, const char* who) {
  if (degree < 0 || degree > kMaxDegree)
    throw std::invalid_argument(std::string(who) +
                                ": degree must lie in [0,20]");
}

}  // namespace

QuadratureRule quadrature_segment(int degree) {
  check_degree(degree, "quadrature_segment");
  const int n = (degree + 2) / 2;  // 2n-1 >= degree
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  QuadratureRule rule;
  rule.degree = degree;
  rule.dim = 1;
  for (int i = 0; i < n; ++i) {
    rule.points.emplace_back(0.5 * (x[static_cast<size_t>(i)] + 1.0), 0.0);
    rule.weights.push_back(0.5 * w[static_cast<size_t>(i)]);
  }
  return rule;
}

QuadratureRule quadrature_triangle(int degree) {
  check_degree(degree, "quadrature_triangle");
  // Collapsed (Duffy) product rule: x = a(1-b), y = b with a,b Gauss points
  // on [0,1].  The Jacobian factor (1-b) raises the b-degree by one, hence
  // the +2 in the point count.
  const int n = (degree + 3) / 2;  // 2n-1 >= degree+1
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  std::vector<double> a(static_cast<size_t>(n)), wa(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    a[static_cast<size_t>(i)] = 0.5 * (x[static_cast<size_t>(i)] + 1.0);
    wa[static_cast<size_t>(i)] = 0.5 * w[static_cast<size_t>(i)];
  }
  QuadratureRule rule;
  rule.degree = degree;
  rule.dim = 2;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double ai = a[static_cast<size_t>(i)];
      const double bj = a[static_cast<size_t>(j)];
      rule.points.emplace_back(ai * (1.0 - bj), bj);
      rule.weights.push_back(wa[static_cast<size_t>(i)] *
                             wa[static_cast<size_t>(j)] * (1.0 - bj));
    }
  }
  return rule;
}

}  // namespace sdt
