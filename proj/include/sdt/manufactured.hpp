#pragma once
/// @file manufactured.hpp
/// @brief Closed-form reference solutions driving the verification studies.
///
/// The flow fields live on the unit square with the porous region below
/// y = 1/2 and the free-flow region above it.  For every viscosity mu and
/// permeability kappa they satisfy the momentum and mass balances with the
/// body force and mass source returned here, and they satisfy all three
/// coupling conditions across y = 1/2 (normal-velocity continuity, normal
/// stress balance, and the slip condition) provided the slip coefficient is
/// the one returned by alpha().

#include "sdt/mesh.hpp"

namespace sdt {

struct ReferenceFlow {
  double mu = 1.0;
  double kappa = 1.0;

  /// Velocity in the given region (both regions share the normal component
  /// across the interface, but the tangential components differ).
  Vec2 velocity(const Vec2& x, Region region) const;

  /// Pressure in the given region; the global mean over the unit square is
  /// exactly zero.
  double pressure(const Vec2& x, Region region) const;

  /// Free-flow momentum source: -div(2 mu eps(u)) + grad p.
  Vec2 body_force(const Vec2& x) const;

  /// Porous-region mass source: -div u.
  double mass_source(const Vec2& x) const;

  /// Slip coefficient for which the tangential interface condition holds.
  double alpha() const;
};

/// Travelling-wave reference concentration c(x, t) used by the transport
/// convergence studies; its initial L2 norm over the unit square is 1/2.
struct ReferenceTransport {
  double value(const Vec2& x, double t) const;
  Vec2 gradient(const Vec2& x, double t) const;
  double time_derivative(const Vec2& x, double t) const;
  /// Second derivatives (xx, xy, yy) for assembling diffusion sources.
  void hessian(const Vec2& x, double t, double& cxx, double& cxy,
               double& cyy) const;
};

/// Source that makes the reference concentration solve
///   phi dc/dt + div(u c) - div(D grad c) = f
/// against the reference flow field, with porosity phi and a constant
/// diffusion tensor [[dxx, dxy], [dxy, dyy]].  The divergence of the flow
/// velocity vanishes in the free-flow region and equals -mass_source in the
/// porous region, which is where the region argument enters.
double manufactured_transport_source(const ReferenceFlow& flow,
                                     const ReferenceTransport& ref,
                                     const Vec2& x, double t, Region region,
                                     double phi, double dxx, double dxy,
                                     double dyy);

}  // namespace sdt
