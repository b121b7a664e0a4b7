/// @file test_manufactured.cpp
/// @brief Finite-difference verification that the reference fields satisfy
///        the coupled flow equations, the interface conditions, and the
///        transport balance, independent of how the closed forms were coded.

#include "doctest.h"
#include "sdt/fespace.hpp"
#include "sdt/manufactured.hpp"

#include <cmath>
#include <random>

using namespace sdt;

namespace {

// First derivative by central differences.
template <typename F>
double d1(const F& f, double h = 1e-6) {
  return (f(h) - f(-h)) / (2.0 * h);
}

// Second derivative by central differences.
template <typename F>
double d2(const F& f, double h = 1e-4) {
  return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
}

Vec2 random_point(std::mt19937& gen, double ylo, double yhi) {
  std::uniform_real_distribution<double> ux(0.02, 0.98);
  std::uniform_real_distribution<double> uy(ylo, yhi);
  return {ux(gen), uy(gen)};
}

}  // namespace

TEST_CASE("free-flow region: momentum and mass balances hold") {
  std::mt19937 gen(41u);
  for (const auto& [mu, kappa] : {std::pair{1.0, 1.0}, {0.3, 2.5}}) {
    const ReferenceFlow flow{mu, kappa};
    for (int trial = 0; trial < 25; ++trial) {
      const Vec2 x = random_point(gen, 0.52, 0.98);
      const auto u = [&](int comp, double dx, double dy) {
        Vec2 v = flow.velocity({x.x + dx, x.y + dy}, Region::Stokes);
        return comp == 0 ? v.x : v.y;
      };
      // -div(2 mu eps(u)) = -mu (lap u + grad(div u)).  Nested differences
      // need the larger step: the inner rounding error is divided by the
      // outer step again.
      const double hh = 1e-4;
      const double div_dx = d1(
          [&](double h) {
            return d1([&](double g) { return u(0, h + g, 0.0); }, hh) +
                   d1([&](double g) { return u(1, h, g); }, hh);
          },
          hh);
      const double div_dy = d1(
          [&](double h) {
            return d1([&](double g) { return u(0, g, h); }, hh) +
                   d1([&](double g) { return u(1, 0.0, h + g); }, hh);
          },
          hh);
      const double lap_u0 = d2([&](double h) { return u(0, h, 0.0); }) +
                            d2([&](double h) { return u(0, 0.0, h); });
      const double lap_u1 = d2([&](double h) { return u(1, h, 0.0); }) +
                            d2([&](double h) { return u(1, 0.0, h); });
      const double dpx = d1([&](double h) {
        return flow.pressure({x.x + h, x.y}, Region::Stokes);
      });
      const double dpy = d1([&](double h) {
        return flow.pressure({x.x, x.y + h}, Region::Stokes);
      });
      const Vec2 f = flow.body_force(x);
      CHECK(std::abs(-mu * (lap_u0 + div_dx) + dpx - f.x) <= 2e-6);
      CHECK(std::abs(-mu * (lap_u1 + div_dy) + dpy - f.y) <= 2e-6);

      const double div_u = d1([&](double h) { return u(0, h, 0.0); }) +
                           d1([&](double h) { return u(1, 0.0, h); });
      CHECK(std::abs(div_u) <= 1e-8);
    }
  }
}

TEST_CASE("porous region: Darcy law and mass balance hold") {
  std::mt19937 gen(43u);
  for (const auto& [mu, kappa] : {std::pair{1.0, 1.0}, {0.3, 2.5}}) {
    const ReferenceFlow flow{mu, kappa};
    for (int trial = 0; trial < 25; ++trial) {
      const Vec2 x = random_point(gen, 0.02, 0.48);
      const Vec2 u = flow.velocity(x, Region::Darcy);
      const double dpx = d1([&](double h) {
        return flow.pressure({x.x + h, x.y}, Region::Darcy);
      });
      const double dpy = d1([&](double h) {
        return flow.pressure({x.x, x.y + h}, Region::Darcy);
      });
      CHECK(std::abs(u.x / kappa + dpx) <= 1e-7);
      CHECK(std::abs(u.y / kappa + dpy) <= 1e-7);

      const double div_u =
          d1([&](double h) {
            return flow.velocity({x.x + h, x.y}, Region::Darcy).x;
          }) +
          d1([&](double h) {
            return flow.velocity({x.x, x.y + h}, Region::Darcy).y;
          });
      CHECK(std::abs(-div_u - flow.mass_source(x)) <= 1e-7);
    }
  }
}

TEST_CASE("interface conditions hold along y = 1/2") {
  // Unit normal n = (0, -1), pointing from the free-flow region into the
  // porous one; the tangential direction is x.
  for (const auto& [mu, kappa] : {std::pair{1.0, 1.0}, {0.3, 2.5}}) {
    const ReferenceFlow flow{mu, kappa};
    const double alpha = flow.alpha();
    for (double xx : {0.07, 0.21, 0.38, 0.55, 0.73, 0.92}) {
      const Vec2 x{xx, 0.5};
      const Vec2 us = flow.velocity(x, Region::Stokes);
      const Vec2 ud = flow.velocity(x, Region::Darcy);
      // Normal velocity continuous, tangential velocity genuinely jumps.
      CHECK(us.y == doctest::Approx(ud.y).epsilon(1e-13));
      CHECK(std::abs(us.x - ud.x) > 1e-3 * std::abs(us.x));

      // eps22 and eps12 of the free-flow velocity via finite differences.
      const double e22 = d1([&](double h) {
        return flow.velocity({x.x, x.y + h}, Region::Stokes).y;
      });
      const double e12 =
          0.5 * (d1([&](double h) {
                   return flow.velocity({x.x, x.y + h}, Region::Stokes).x;
                 }) +
                 d1([&](double h) {
                   return flow.velocity({x.x + h, x.y}, Region::Stokes).y;
                 }));

      // Normal stress balance: p_free - 2 mu eps22 = p_porous.
      const double lhs = flow.pressure(x, Region::Stokes) - 2.0 * mu * e22;
      CHECK(lhs == doctest::Approx(flow.pressure(x, Region::Darcy))
                       .epsilon(1e-6)
                       .scale(1.0));

      // Slip condition: 2 mu eps12 = alpha kappa^{-1/2} * (tangential velocity).
      CHECK(2.0 * mu * e12 ==
            doctest::Approx(alpha / std::sqrt(kappa) * us.x)
                .epsilon(1e-6)
                .scale(1.0));
    }
  }
}

TEST_CASE("reference pressure has zero global mean") {
  MeshParams params;
  params.nx = 8;
  params.ny = 8;
  params.pattern = DiagonalPattern::Crossed;
  const Mesh mesh = build_structured_mesh(params);
  const QuadratureRule tri = quadrature_triangle(12);
  const ReferenceFlow flow{0.7, 1.9};
  double integral = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = cell_map(mesh, c);
    const Region region = mesh.cells[static_cast<size_t>(c)].region;
    for (int q = 0; q < tri.size(); ++q) {
      const Vec2 x = map.to_physical(tri.points[static_cast<size_t>(q)]);
      integral += tri.weights[static_cast<size_t>(q)] * map.det *
                  flow.pressure(x, region);
    }
  }
  CHECK(std::abs(integral) <= 1e-12);
}

TEST_CASE("transport balance: source closes the equation in both regions") {
  std::mt19937 gen(47u);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  const ReferenceFlow flow{1.0, 1.0};
  const ReferenceTransport ref;
  const double fd_h = 5e-5;
  struct Setup {
    Region region;
    double phi, dxx, dxy, dyy;
  };
  const Setup setups[] = {{Region::Stokes, 1.0, 0.01, 0.005, 0.02},
                          {Region::Darcy, 1.0, 0.01, 0.005, 0.02},
                          {Region::Darcy, 0.4, 1e-5, 2e-6, 3e-5}};
  for (const Setup& s : setups) {
    for (int trial = 0; trial < 25; ++trial) {
      const Vec2 x = s.region == Region::Stokes ? random_point(gen, 0.52, 0.98)
                                                : random_point(gen, 0.02, 0.48);
      const double t = ut(gen);
      const auto uc = [&](int comp, double dx, double dy) {
        const Vec2 xp{x.x + dx, x.y + dy};
        const Vec2 v = flow.velocity(xp, s.region);
        return (comp == 0 ? v.x : v.y) * ref.value(xp, t);
      };
      const double div_uc = d1([&](double h) { return uc(0, h, 0.0); }) +
                            d1([&](double h) { return uc(1, 0.0, h); });
      const double dct =
          d1([&](double h) { return ref.value(x, t + h); });
      const double cxx =
          d2([&](double h) { return ref.value({x.x + h, x.y}, t); }, fd_h);
      const double cyy =
          d2([&](double h) { return ref.value({x.x, x.y + h}, t); }, fd_h);
      const double cxy = d1(
          [&](double h) {
            return d1([&](double g) { return ref.value({x.x + h, x.y + g}, t); },
                      1e-4);
          },
          1e-4);
      const double div_D_grad =
          s.dxx * cxx + 2.0 * s.dxy * cxy + s.dyy * cyy;
      const double f = manufactured_transport_source(
          flow, ref, x, t, s.region, s.phi, s.dxx, s.dxy, s.dyy);
      CHECK(std::abs(s.phi * dct + div_uc - div_D_grad - f) <= 1e-6);
    }
  }
}

TEST_CASE("reference concentration: derivatives match finite differences") {
  std::mt19937 gen(53u);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  const ReferenceTransport ref;
  for (int trial = 0; trial < 30; ++trial) {
    const Vec2 x = random_point(gen, 0.05, 0.95);
    const double t = ut(gen);
    const Vec2 g = ref.gradient(x, t);
    CHECK(std::abs(g.x - d1([&](double h) {
            return ref.value({x.x + h, x.y}, t);
          })) <= 1e-7);
    CHECK(std::abs(g.y - d1([&](double h) {
            return ref.value({x.x, x.y + h}, t);
          })) <= 1e-7);
    CHECK(std::abs(ref.time_derivative(x, t) - d1([&](double h) {
            return ref.value(x, t + h);
          })) <= 1e-7);
    double cxx, cxy, cyy;
    ref.hessian(x, t, cxx, cxy, cyy);
    CHECK(std::abs(cxx - d2([&](double h) {
            return ref.value({x.x + h, x.y}, t);
          })) <= 1e-5);
    CHECK(std::abs(cyy - d2([&](double h) {
            return ref.value({x.x, x.y + h}, t);
          })) <= 1e-5);
    CHECK(std::abs(cxy - d1(
                       [&](double h) {
                         return d1(
                             [&](double g2) {
                               return ref.value({x.x + h, x.y + g2}, t);
                             },
                             1e-4);
                       },
                       1e-4)) <= 1e-5);
  }
}

TEST_CASE("initial concentration has L2 norm one half") {
  MeshParams params;
  params.nx = 8;
  params.ny = 8;
  params.pattern = DiagonalPattern::Crossed;
  const Mesh mesh = build_structured_mesh(params);
  const QuadratureRule tri = quadrature_triangle(14);
  const ReferenceTransport ref;
  double norm2 = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = cell_map(mesh, c);
    for (int q = 0; q < tri.size(); ++q) {
      const Vec2 x = map.to_physical(tri.points[static_cast<size_t>(q)]);
      const double v = ref.value(x, 0.0);
      norm2 += tri.weights[static_cast<size_t>(q)] * map.det * v * v;
    }
  }
  CHECK(std::sqrt(norm2) == doctest::Approx(0.5).epsilon(1e-9));
}
