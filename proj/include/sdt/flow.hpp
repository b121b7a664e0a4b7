#pragma once
/// @file flow.hpp
/// @brief Hybridized discretization of coupled free-flow / porous-medium flow.
///
/// One velocity-pressure pair lives brokenly on every cell; facet unknowns
/// glue the cells together: a continuous facet velocity on the free-flow
/// skeleton and discontinuous facet pressures on each region's skeleton
/// (interface facets carry both facet pressures).  The facet-pressure test
/// rows weakly enforce continuity of the normal velocity, which makes the
/// discrete velocity exactly mass-conservative: cellwise divergence matches
/// the projected source, normal components match across every facet, and the
/// facet velocity carries the same normal trace on the interface.

#include "sdt/fespace.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace sdt {

/// Boundary condition attached to one boundary label.
struct FlowBC {
  enum class Kind {
    VelocityDirichlet,  ///< full velocity vector prescribed (free-flow side)
    TotalStressZero,    ///< zero total normal stress outflow (free-flow side)
    SlipSymmetry,       ///< u.n = 0 with zero tangential stress (free-flow side)
    NormalFluxData,     ///< u.n prescribed, n outward (porous side)
    PressureData,       ///< facet pressure prescribed (porous side)
  };
  Kind kind;
  BoundaryLabel where = BoundaryLabel::None;
  std::function<Vec2(const Vec2&)> velocity;  ///< VelocityDirichlet only
  std::function<double(const Vec2&)> scalar;  ///< NormalFluxData / PressureData
};

FlowBC velocity_dirichlet_bc(BoundaryLabel where,
                             std::function<Vec2(const Vec2&)> g);
FlowBC total_stress_zero_bc(BoundaryLabel where);
FlowBC slip_symmetry_bc(BoundaryLabel where);
FlowBC normal_flux_bc(BoundaryLabel where, std::function<double(const Vec2&)> g);
FlowBC pressure_bc(BoundaryLabel where, std::function<double(const Vec2&)> g);

/// Scalar coefficient evaluated pointwise; the region disambiguates fields
/// defined piecewise (the permeability is only ever queried in the porous
/// region).
using CoefficientFn = std::function<double(const Vec2&, Region)>;

enum class PressureGauge {
  ZeroMean,     ///< pin the global pressure mean to zero via one multiplier
  BoundarySet,  ///< a pressure-valued boundary condition fixes the level
};

struct FlowProblem {
  double mu = 1.0;                ///< free-flow viscosity
  CoefficientFn kappa;            ///< permeability (porous region)
  double alpha = 1.0;             ///< interface slip coefficient
  std::function<Vec2(const Vec2&)> body_force;     ///< free-flow momentum source
  std::function<double(const Vec2&)> mass_source;  ///< porous mass source
  std::vector<FlowBC> bcs;
  PressureGauge gauge = PressureGauge::ZeroMean;
};

struct FlowDiscretization {
  int degree = 2;              ///< velocity degree k >= 2 (pressure degree k-1)
  double penalty = -1.0;       ///< facet penalty; negative selects 10 k^2
  int quadrature_degree = -1;  ///< shared rule degree; negative selects 2k+2
};

/// Spaces, shared quadrature, and the global dof layout
/// [u | p | ubar | pbar_s | pbar_d | mean multiplier?].
struct FlowSystem {
  const Mesh* mesh = nullptr;
  FlowDiscretization disc;
  double beta = 0.0;  ///< resolved facet penalty

  CellSpace velocity;              ///< vector P_k on every cell
  CellSpace pressure;              ///< scalar P_{k-1} on every cell
  SkeletonSpace facet_velocity;    ///< continuous vector P_k, free-flow skeleton
  SkeletonSpace facet_pressure_s;  ///< discontinuous P_k, free-flow skeleton
  SkeletonSpace facet_pressure_d;  ///< discontinuous P_k, porous skeleton

  QuadratureRule tri_rule;
  QuadratureRule seg_rule;

  int off_u = 0, off_p = 0, off_ubar = 0, off_ps = 0, off_pd = 0;
  int n_total = 0;
  bool has_mean_row = false;
};

FlowSystem build_flow_system(const Mesh& mesh, const FlowDiscretization& disc,
                             PressureGauge gauge);

/// Constrained symmetric system ready for a direct solve.
struct AssembledFlow {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<char> constrained;       ///< essential-dof mask
  Eigen::VectorXd constrained_values;  ///< values on the masked dofs
};

AssembledFlow assemble_flow(const FlowSystem& sys, const FlowProblem& problem);

struct FlowSolution {
  std::vector<double> u;     ///< cell velocity coefficients
  std::vector<double> p;     ///< cell pressure coefficients
  std::vector<double> ubar;  ///< facet velocity coefficients
  std::vector<double> ps;    ///< free-flow facet pressure coefficients
  std::vector<double> pd;    ///< porous facet pressure coefficients
  double mean_multiplier = 0.0;
};

FlowSolution solve_flow(const FlowSystem& sys, const FlowProblem& problem);

/// Mass-conservation residuals of a discrete flow solution, integrated with
/// an independent quadrature rule.
struct FlowReport {
  double divergence_l2 = 0.0;       ///< || div u_h + X_porous proj f ||_{L2}
  double jump_l2 = 0.0;             ///< sqrt(sum over facets of ||[u.n]||^2)
  double interface_trace_l2 = 0.0;  ///< || (u - ubar).n ||_{L2(interface)}
  double velocity_l2 = 0.0;         ///< || u_h ||_{L2} for relative scaling
};

FlowReport check_flow_conservation(const FlowSystem& sys,
                                   const FlowProblem& problem,
                                   const FlowSolution& sol);

}  // namespace sdt
