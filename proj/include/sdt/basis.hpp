/// @file basis.hpp
/// @brief Nodal Lagrange bases on the reference triangle and unit segment.
///
/// Equispaced Lagrange nodes, represented through monomial coefficients
/// obtained from the inverse Vandermonde matrix.  Degrees up to 4 are
/// supported, which covers the velocity/pressure/concentration spaces used
/// by the solver (k <= 3).
#pragma once

#include "sdt/mesh.hpp"

#include <utility>
#include <vector>

namespace sdt {

struct ReferenceBasis {
  int degree = 1;
  int dim = 2;                     // 2 = triangle, 1 = segment
  std::vector<Vec2> nodes;         // Lagrange nodes (segment: x component)
  std::vector<std::pair<int, int>> monomials;  // exponent pairs (a, b)
  std::vector<double> coeff;       // coeff[m*size+i]: monomial m of phi_i

  int size() const { return static_cast<int>(nodes.size()); }

  /// Values of all basis functions at a reference point.
  void eval(const Vec2& p, std::vector<double>& values) const;

  /// Reference gradients of all basis functions at a reference point.
  /// For segment bases the derivative is returned in the x component.
  void eval_grad(const Vec2& p, std::vector<Vec2>& grads) const;
};

/// Lagrange basis of the given degree on the reference triangle
/// {x >= 0, y >= 0, x + y <= 1}; node order: rows j = 0..degree bottom-up,
/// i ascending within a row.  Degree 0 is the constant 1.
ReferenceBasis triangle_basis(int degree);

/// Lagrange basis on [0,1] with nodes t_i = i/degree ascending; local node 0
/// sits at t = 0 and local node `degree` at t = 1.  Degree 0 is the
/// constant 1 with node t = 1/2.
ReferenceBasis segment_basis(int degree);

/// Convenience bundle: all basis values and gradients at one point.
std::pair<std::vector<double>, std::vector<Vec2>> eval_basis(
    const ReferenceBasis& basis, const Vec2& point);

}  // namespace sdt
