/// @file test_basis.cpp
/// @brief Lagrange bases: Kronecker property, partition of unity, and
///        finite-difference validation of gradients.

#include "doctest.h"
#include "sdt/basis.hpp"

#include <cmath>
#include <random>

using namespace sdt;

namespace {

/// Random points strictly inside the reference triangle.
Vec2 random_triangle_point(std::mt19937& gen) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  double a = u(gen), b = u(gen);
  if (a + b > 1.0) {
    a = 1.0 - a;
    b = 1.0 - b;
  }
  return {a, b};
}

double poly23(const Vec2& p) {  // a degree-2 polynomial for interpolation checks
  return 1.5 - 0.75 * p.x + 2.0 * p.y + 0.5 * p.x * p.x - p.x * p.y +
         0.25 * p.y * p.y;
}

}  // namespace

TEST_CASE("triangle basis: Kronecker property at nodes") {
  for (int degree = 0; degree <= 4; ++degree) {
    const ReferenceBasis basis = triangle_basis(degree);
    std::vector<double> values;
    for (int j = 0; j < basis.size(); ++j) {
      basis.eval(basis.nodes[static_cast<size_t>(j)], values);
      for (int i = 0; i < basis.size(); ++i)
        CHECK(values[static_cast<size_t>(i)] ==
              doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-11));
    }
  }
}

TEST_CASE("triangle basis: partition of unity and zero gradient sum") {
  std::mt19937 gen(7u);
  for (int degree = 1; degree <= 4; ++degree) {
    const ReferenceBasis basis = triangle_basis(degree);
    std::vector<double> values;
    std::vector<Vec2> grads;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec2 p = random_triangle_point(gen);
      basis.eval(p, values);
      basis.eval_grad(p, grads);
      double vsum = 0.0;
      Vec2 gsum;
      for (int i = 0; i < basis.size(); ++i) {
        vsum += values[static_cast<size_t>(i)];
        gsum = gsum + grads[static_cast<size_t>(i)];
      }
      CHECK(vsum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(gsum.x) <= 1e-11);
      CHECK(std::abs(gsum.y) <= 1e-11);
    }
  }
}

TEST_CASE("triangle basis: gradients match central finite differences") {
  std::mt19937 gen(11u);
  const double step = 1e-6;
  for (int degree = 1; degree <= 4; ++degree) {
    const ReferenceBasis basis = triangle_basis(degree);
    std::vector<double> vxp, vxm, vyp, vym;
    std::vector<Vec2> grads;
    std::vector<Vec2> pts = {Vec2{1.0 / 3.0, 1.0 / 3.0}};  // centroid always
    for (int trial = 0; trial < 10; ++trial) pts.push_back(random_triangle_point(gen));
    for (const Vec2& p : pts) {
      basis.eval_grad(p, grads);
      basis.eval({p.x + step, p.y}, vxp);
      basis.eval({p.x - step, p.y}, vxm);
      basis.eval({p.x, p.y + step}, vyp);
      basis.eval({p.x, p.y - step}, vym);
      for (int i = 0; i < basis.size(); ++i) {
        const double fdx =
            (vxp[static_cast<size_t>(i)] - vxm[static_cast<size_t>(i)]) /
            (2.0 * step);
        const double fdy =
            (vyp[static_cast<size_t>(i)] - vym[static_cast<size_t>(i)]) /
            (2.0 * step);
        const double scale =
            std::max({1.0, std::abs(grads[static_cast<size_t>(i)].x),
                      std::abs(grads[static_cast<size_t>(i)].y)});
        CHECK(std::abs(grads[static_cast<size_t>(i)].x - fdx) <= 1e-7 * scale);
        CHECK(std::abs(grads[static_cast<size_t>(i)].y - fdy) <= 1e-7 * scale);
      }
    }
  }
}

TEST_CASE("triangle basis: nodal interpolation reproduces in-space polynomials") {
  std::mt19937 gen(13u);
  for (int degree = 2; degree <= 4; ++degree) {
    const ReferenceBasis basis = triangle_basis(degree);
    std::vector<double> dof(static_cast<size_t>(basis.size()));
    for (int i = 0; i < basis.size(); ++i)
      dof[static_cast<size_t>(i)] = poly23(basis.nodes[static_cast<size_t>(i)]);
    std::vector<double> values;
    for (int trial = 0; trial < 20; ++trial) {
      const Vec2 p = random_triangle_point(gen);
      basis.eval(p, values);
      double interp = 0.0;
      for (int i = 0; i < basis.size(); ++i)
        interp += dof[static_cast<size_t>(i)] * values[static_cast<size_t>(i)];
      CHECK(interp == doctest::Approx(poly23(p)).epsilon(1e-11));
    }
  }
}

TEST_CASE("segment basis: Kronecker, unity, gradients, endpoint layout") {
  std::mt19937 gen(17u);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int degree = 1; degree <= 4; ++degree) {
    const ReferenceBasis basis = segment_basis(degree);
    CHECK(basis.nodes.front().x == doctest::Approx(0.0));
    CHECK(basis.nodes.back().x == doctest::Approx(1.0));
    std::vector<double> values, vp, vm;
    std::vector<Vec2> grads;
    for (int j = 0; j < basis.size(); ++j) {
      basis.eval(basis.nodes[static_cast<size_t>(j)], values);
      for (int i = 0; i < basis.size(); ++i)
        CHECK(values[static_cast<size_t>(i)] ==
              doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-11));
    }
    for (int trial = 0; trial < 20; ++trial) {
      const Vec2 p{u(gen), 0.0};
      basis.eval(p, values);
      basis.eval_grad(p, grads);
      double vsum = 0.0, gsum = 0.0;
      for (int i = 0; i < basis.size(); ++i) {
        vsum += values[static_cast<size_t>(i)];
        gsum += grads[static_cast<size_t>(i)].x;
      }
      CHECK(vsum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(gsum) <= 1e-11);
      const double step = 1e-6;
      basis.eval({p.x + step, 0.0}, vp);
      basis.eval({p.x - step, 0.0}, vm);
      for (int i = 0; i < basis.size(); ++i) {
        const double fd =
            (vp[static_cast<size_t>(i)] - vm[static_cast<size_t>(i)]) /
            (2.0 * step);
        const double scale =
            std::max(1.0, std::abs(grads[static_cast<size_t>(i)].x));
        CHECK(std::abs(grads[static_cast<size_t>(i)].x - fd) <= 1e-7 * scale);
      }
    }
  }
}

TEST_CASE("basis degree bounds") {
  CHECK_THROWS(triangle_basis(-1));
  CHECK_THROWS(triangle_basis(5));
  CHECK_THROWS(segment_basis(5));
}
