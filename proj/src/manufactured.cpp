/// @file manufactured.cpp
/// @brief Closed-form reference flow and transport solutions.

#include "sdt/manufactured.hpp"

#include <cmath>

namespace sdt {

namespace {
const double kPi = std::acos(-1.0);
}

Vec2 ReferenceFlow::velocity(const Vec2& x, Region region) const {
  const double s = std::sin(kPi * x.x);
  const double c = std::cos(kPi * x.x);
  const double e = std::exp(0.5 * x.y);
  if (region == Region::Stokes)
    return {-s * e / (2.0 * kPi * kPi), c * e / kPi};
  return {-2.0 * s * e, c * e / kPi};
}

double ReferenceFlow::pressure(const Vec2& x, Region region) const {
  const double c = std::cos(kPi * x.x);
  const double e = std::exp(0.5 * x.y);
  if (region == Region::Stokes)
    return (kappa * mu - 2.0) / (kappa * kPi) * c * e;
  return -2.0 / (kappa * kPi) * c * e;
}

Vec2 ReferenceFlow::body_force(const Vec2& x) const {
  const double s = std::sin(kPi * x.x);
  const double c = std::cos(kPi * x.x);
  const double e = std::exp(0.5 * x.y);
  const double fx = -2.0 * mu * s * e * (0.25 - 1.0 / (16.0 * kPi * kPi)) -
                    (kappa * mu - 2.0) / kappa * s * e;
  const double fy = -2.0 * mu * c * e * (-0.5 * kPi + 1.0 / (8.0 * kPi)) +
                    (kappa * mu - 2.0) / (2.0 * kappa * kPi) * c * e;
  return {fx, fy};
}

double ReferenceFlow::mass_source(const Vec2& x) const {
  const double c = std::cos(kPi * x.x);
  const double e = std::exp(0.5 * x.y);
  return (2.0 * kPi - 1.0 / (2.0 * kPi)) * c * e;
}

double ReferenceFlow::alpha() const {
  return mu * std::sqrt(kappa) * (1.0 + 4.0 * kPi * kPi) / 2.0;
}

double ReferenceTransport::value(const Vec2& x, double t) const {
  return std::sin(2.0 * kPi * (x.x - t)) * std::cos(2.0 * kPi * (x.y - t));
}

Vec2 ReferenceTransport::gradient(const Vec2& x, double t) const {
  const double sx = std::sin(2.0 * kPi * (x.x - t));
  const double cx = std::cos(2.0 * kPi * (x.x - t));
  const double sy = std::sin(2.0 * kPi * (x.y - t));
  const double cy = std::cos(2.0 * kPi * (x.y - t));
  return {2.0 * kPi * cx * cy, -2.0 * kPi * sx * sy};
}

double ReferenceTransport::time_derivative(const Vec2& x, double t) const {
  const double sx = std::sin(2.0 * kPi * (x.x - t));
  const double cx = std::cos(2.0 * kPi * (x.x - t));
  const double sy = std::sin(2.0 * kPi * (x.y - t));
  const double cy = std::cos(2.0 * kPi * (x.y - t));
  return -2.0 * kPi * cx * cy + 2.0 * kPi * sx * sy;
}

void ReferenceTransport::hessian(const Vec2& x, double t, double& cxx,
                                 double& cxy, double& cyy) const {
  const double sx = std::sin(2.0 * kPi * (x.x - t));
  const double cx = std::cos(2.0 * kPi * (x.x - t));
  const double sy = std::sin(2.0 * kPi * (x.y - t));
  const double cy = std::cos(2.0 * kPi * (x.y - t));
  const double w2 = 4.0 * kPi * kPi;
  cxx = -w2 * sx * cy;
  cyy = -w2 * sx * cy;
  cxy = -w2 * cx * sy;
}

double manufactured_transport_source(const ReferenceFlow& flow,
                                     const ReferenceTransport& ref,
                                     const Vec2& x, double t, Region region,
                                     double phi, double dxx, double dxy,
                                     double dyy) {
  const Vec2 u = flow.velocity(x, region);
  const Vec2 grad = ref.gradient(x, t);
  double cxx, cxy, cyy;
  ref.hessian(x, t, cxx, cxy, cyy);
  double f = phi * ref.time_derivative(x, t) + u.x * grad.x + u.y * grad.y -
             (dxx * cxx + 2.0 * dxy * cxy + dyy * cyy);
  if (region == Region::Darcy)
    f -= flow.mass_source(x) * ref.value(x, t);  // div u = -mass_source there
  return f;
}

}  // namespace sdt
