/// @file test_quadrature.cpp
/// @brief Quadrature rules against the closed-form monomial integrals.
///
/// Triangle oracle: int_T x^a y^b = a! b! / (a+b+2)!.
/// Segment oracle:  int_0^1 t^a = 1/(a+1).

#include "doctest.h"
#include "sdt/quadrature.hpp"

#include <cmath>
#include <random>

using namespace sdt;

namespace {

long double factorial(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double triangle_monomial_exact(int a, int b) {
  return static_cast<double>(factorial(a) * factorial(b) /
                             factorial(a + b + 2));
}

double apply_triangle(const QuadratureRule& rule, int a, int b) {
  double sum = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2& p = rule.points[static_cast<size_t>(q)];
    sum += rule.weights[static_cast<size_t>(q)] * std::pow(p.x, a) *
           std::pow(p.y, b);
  }
  return sum;
}

double apply_segment(const QuadratureRule& rule, int a) {
  double sum = 0.0;
  for (int q = 0; q < rule.size(); ++q)
    sum += rule.weights[static_cast<size_t>(q)] *
           std::pow(rule.points[static_cast<size_t>(q)].x, a);
  return sum;
}

}  // namespace

TEST_CASE("triangle rules: pinned monomial values") {
  CHECK(apply_triangle(quadrature_triangle(0), 0, 0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(apply_triangle(quadrature_triangle(5), 2, 1) ==
        doctest::Approx(1.0 / 60.0).epsilon(1e-13));
  CHECK(apply_triangle(quadrature_triangle(8), 3, 4) ==
        doctest::Approx(1.0 / 2520.0).epsilon(1e-13));
}

TEST_CASE("triangle rules: every monomial up to the declared degree") {
  for (int degree = 0; degree <= 12; ++degree) {
    const QuadratureRule rule = quadrature_triangle(degree);
    CHECK(rule.dim == 2);
    for (int a = 0; a + 0 <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b)
        CHECK(std::abs(apply_triangle(rule, a, b) -
                       triangle_monomial_exact(a, b)) <= 1e-13);
  }
}

TEST_CASE("triangle rules: positive weights summing to the reference area") {
  for (int degree : {0, 1, 2, 3, 5, 8, 12, 20}) {
    const QuadratureRule rule = quadrature_triangle(degree);
    double sum = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("segment rules: pinned monomial values") {
  CHECK(apply_segment(quadrature_segment(1), 0) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(apply_segment(quadrature_segment(3), 3) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK(apply_segment(quadrature_segment(7), 7) ==
        doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("segment rules: all monomials, positivity, unit weight sum") {
  for (int degree = 0; degree <= 15; ++degree) {
    const QuadratureRule rule = quadrature_segment(degree);
    CHECK(rule.dim == 1);
    double sum = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (int a = 0; a <= degree; ++a)
      CHECK(std::abs(apply_segment(rule, a) - 1.0 / (a + 1)) <= 1e-13);
  }
}

TEST_CASE("random polynomials integrate to the monomial-formula value") {
  std::mt19937 gen(20240817u);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int degree : {2, 4, 7, 10}) {
    const QuadratureRule tri = quadrature_triangle(degree);
    double quad = 0.0, exact = 0.0, scale = 0.0;
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        const double c = coeff(gen);
        quad += c * apply_triangle(tri, a, b);
        exact += c * triangle_monomial_exact(a, b);
        scale += std::abs(c);
      }
    CHECK(std::abs(quad - exact) <= 1e-13 * scale);
  }
}

TEST_CASE("degree bounds are enforced") {
  CHECK_THROWS(quadrature_triangle(-1));
  CHECK_THROWS(quadrature_triangle(21));
  CHECK_THROWS(quadrature_segment(-1));
  CHECK_THROWS(quadrature_segment(21));
}
