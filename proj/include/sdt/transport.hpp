/// @file transport.hpp
/// @brief Advective-diffusive transport discretization driven by the
///        conservative discrete flow field.
///
/// The concentration is approximated by a discontinuous cellwise polynomial
/// of degree l together with a continuous facet concentration on the whole
/// skeleton.  The advective part is upwinded facet by facet using the inflow
/// part of each cell boundary; the diffusive part is an interior-penalty
/// form written against the facet unknown.  Both parts use the *same*
/// quadrature rules as the flow assembly, which is what makes a constant
/// concentration an exact steady state of the coupled scheme when the cell
/// degree satisfies l <= k - 1 and the source is the compatible one.

#pragma once

#include "sdt/fespace.hpp"
#include "sdt/flow.hpp"
#include "sdt/linsolve.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <vector>

namespace sdt {

/// Symmetric 2x2 diffusion-dispersion tensor.
struct SymTensor {
  double xx = 0.0, xy = 0.0, yy = 0.0;

  Vec2 apply(const Vec2& g) const {
    return {xx * g.x + xy * g.y, xy * g.x + yy * g.y};
  }
  double normal_component(const Vec2& n) const {
    return n.x * n.x * xx + 2.0 * n.x * n.y * xy + n.y * n.y * yy;
  }
};

/// Diffusion-dispersion coefficient; may depend on the local flow velocity.
using DiffusionFn = std::function<SymTensor(const Vec2&, Region, const Vec2&)>;

/// Boundary treatment of the transport equation.
///
/// - ZeroFlux: the scheme is left untouched; the facet equation then
///   enforces a vanishing total (advective plus diffusive) normal flux.
/// - FluxData: prescribes the total inward flux density
///   g = (D grad c - c u).n of the target solution; g receives the point,
///   the time, the outward normal, and the discrete normal velocity.
/// - Outflow: the facet unknown is decoupled from the advective flux on
///   this facet (the upwind exchange term is dropped and the advective flux
///   acts on the cell test function alone), letting mass leave freely.
struct TransportBC {
  enum class Kind { ZeroFlux, FluxData, Outflow };
  Kind kind = Kind::ZeroFlux;
  BoundaryLabel where = BoundaryLabel::None;
  std::function<double(const Vec2&, double, const Vec2&, double)> data;
};

TransportBC zero_flux_bc(BoundaryLabel where);
TransportBC flux_data_bc(
    BoundaryLabel where,
    std::function<double(const Vec2&, double, const Vec2&, double)> g);
TransportBC outflow_bc(BoundaryLabel where);

struct TransportProblem {
  DiffusionFn diffusion;                              ///< required
  std::function<double(const Vec2&, Region)> porosity;  ///< null selects 1
  std::function<double(const Vec2&, double)> source;    ///< f(x, t); null selects 0
  std::vector<TransportBC> bcs;
  std::function<double(const Vec2&)> initial;         ///< concentration at t = 0
};

struct TransportDiscretization {
  int degree = 1;         ///< cell degree l >= 1 (facet unknown has the same degree)
  double penalty = -1.0;  ///< diffusive facet penalty; negative selects 6 l^2
};

/// Quadrature degree both assemblies must share for the coupled scheme's
/// exactness properties (constant steady states, discrete energy identity).
int coupled_quadrature_degree(int flow_degree, int transport_degree);

/// Spaces and dof layout [c | cbar]; the quadrature rules are taken from the
/// flow system so both discretizations integrate identically.
struct TransportSystem {
  const Mesh* mesh = nullptr;
  const FlowSystem* flow = nullptr;
  TransportDiscretization disc;
  double beta = 0.0;  ///< resolved diffusive penalty

  CellSpace conc;            ///< scalar P_l on every cell
  SkeletonSpace facet_conc;  ///< continuous scalar P_l on the whole skeleton

  QuadratureRule tri_rule;
  QuadratureRule seg_rule;

  int off_c = 0, off_cbar = 0;
  int n_total = 0;
};

TransportSystem build_transport_system(const FlowSystem& flow_sys,
                                       const TransportDiscretization& disc);

/// Time-independent matrices of the semi-discrete system
/// M dz/dt + (A + D) z = F(t); the facet rows of M are empty.
struct TransportOperator {
  Eigen::SparseMatrix<double> mass;
  Eigen::SparseMatrix<double> advection;
  Eigen::SparseMatrix<double> diffusion;
};

TransportOperator assemble_transport_operator(const TransportSystem& sys,
                                              const TransportProblem& problem,
                                              const FlowSolution& flow_sol);

/// Source and boundary-data functional at time t.
Eigen::VectorXd assemble_transport_rhs(const TransportSystem& sys,
                                       const TransportProblem& problem,
                                       const FlowSolution& flow_sol, double t);

/// Componentwise L2 projection of the initial concentration onto the cell
/// and facet spaces.
Eigen::VectorXd initial_transport_state(const TransportSystem& sys,
                                        const TransportProblem& problem);

/// One-step theta = 1/2 time integrator for M dz/dt + B z = F(t); the
/// left-hand matrix is factored once.
class CrankNicolson {
 public:
  CrankNicolson(const Eigen::SparseMatrix<double>& mass,
                const Eigen::SparseMatrix<double>& stiffness, double dt);

  /// Advances z(t_n) to z(t_n + dt) given the forcing at both ends.
  Eigen::VectorXd step(const Eigen::VectorXd& z, const Eigen::VectorXd& f_n,
                       const Eigen::VectorXd& f_np1) const;

  double dt() const { return dt_; }

 private:
  double dt_;
  Eigen::SparseMatrix<double> rhs_matrix_;  ///< M/dt - B/2
  SparseFactor factor_;                     ///< M/dt + B/2
};

/// One row of the running mass audit: the stored content, the content the
/// discrete fluxes predict, and their difference.
struct ConservationSample {
  double t = 0.0;
  double mass = 0.0;      ///< integral of porosity times concentration
  double expected = 0.0;  ///< initial content plus accumulated discrete fluxes
  double drift = 0.0;     ///< |mass - expected|
};

/// Crank-Nicolson evolution of the transport system with a per-step exact
/// mass audit derived from the same matrices the step uses.
class TransportStepper {
 public:
  TransportStepper(const TransportSystem& sys, const TransportProblem& problem,
                   const FlowSolution& flow_sol, double dt);

  void advance(int steps);

  double time() const;
  const Eigen::VectorXd& state() const { return z_; }
  double mass() const;
  const std::vector<ConservationSample>& audit() const { return audit_; }
  double max_drift() const;

  /// Concentration coefficients (cell block of the state).
  std::vector<double> cell_coefficients() const;
  /// Facet concentration coefficients.
  std::vector<double> facet_coefficients() const;

 private:
  const TransportSystem& sys_;
  const TransportProblem& problem_;
  FlowSolution flow_sol_;
  double dt_;
  long steps_done_ = 0;

  TransportOperator op_;
  CrankNicolson cn_;
  Eigen::VectorXd mass_row_;       ///< 1^T M
  Eigen::VectorXd stiffness_row_;  ///< 1^T (A + D)
  Eigen::VectorXd z_;
  Eigen::VectorXd f_current_;
  double expected_ = 0.0;
  std::vector<ConservationSample> audit_;
};

}  // namespace sdt
