/// @file quadrature.hpp
/// @brief Gauss quadrature on the reference triangle and unit segment.
///
/// All inner products in the assembled forms are evaluated with these rules.
/// A rule declares the polynomial degree it integrates exactly; callers pick
/// the degree from the polynomial orders of the integrands so that products
/// of shape functions are integrated without error.
#pragma once

#include "sdt/mesh.hpp"

#include <vector>

namespace sdt {

/// Quadrature on a reference element.  dim = 2: the unit triangle
/// {x >= 0, y >= 0, x + y <= 1}, weights summing to 1/2.  dim = 1: the unit
/// segment [0,1] (points stored in x, y unused), weights summing to 1.
struct QuadratureRule {
  int degree = 0;
  int dim = 2;
  std::vector<Vec2> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

/// Rule exact for all bivariate polynomials of total degree <= degree on the
/// reference triangle.  Collapsed Gauss product construction; all weights
/// positive.  Supported degrees 0..20.
QuadratureRule quadrature_triangle(int degree);

/// Gauss-Legendre rule on [0,1], exact for polynomials of degree <= degree.
/// Supported degrees 0..20.
QuadratureRule quadrature_segment(int degree);

}  // namespace sdt
