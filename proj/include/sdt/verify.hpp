#pragma once
/// @file verify.hpp
/// @brief Error norms, refinement-rate tables, and the structural audits
///        (conservation residuals, uniform-background preservation) behind
///        the verification experiments.
///
/// The refinement studies solve the coupled problem against the closed-form
/// reference fields on a ladder of structured meshes and report L2 and
/// energy-seminorm errors together with observed convergence rates.  The
/// compatibility audit advects a uniform concentration with the discrete
/// flow field and measures how far the state moves from that constant; with
/// the compatible source and matching degrees the answer is "roundoff".

#include "sdt/fespace.hpp"
#include "sdt/flow.hpp"
#include "sdt/manufactured.hpp"
#include "sdt/transport.hpp"

#include <limits>
#include <string>
#include <vector>

namespace sdt {

// ---------------------------------------------------------------------------
// Rate tables
// ---------------------------------------------------------------------------

/// One refinement level.  The rate compares against the previous level,
/// log(e_prev/e) / log(h_prev/h), and is NaN on the first row.
struct RateRow {
  double h = 0.0;
  int elements = 0;
  double error = 0.0;
  double rate = std::numeric_limits<double>::quiet_NaN();
};

struct RateTable {
  std::string label;
  std::vector<RateRow> rows;

  /// Append a level.  h must decrease strictly and the error must be
  /// positive; violations throw std::invalid_argument.
  void add(double h, int elements, double error);

  /// Rate of the last row; NaN with fewer than two rows.
  double final_rate() const;
};

/// CSV serialization with header "h,elements,error,rate"; the rate field of
/// the first row is empty.
std::string to_csv(const RateTable& table);

/// Fixed-width text table, headed by the label when one is set.
std::string to_text(const RateTable& table);

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// L2 norm of (field - exact) over all cells, all components.  A negative
/// quadrature degree selects 2*(degree + 2), enough to resolve smooth
/// non-polynomial references alongside the discrete field.
double l2_error_cells(const CellSpace& space, const Mesh& mesh,
                      const std::vector<double>& coeff, const FieldFn& exact,
                      int quadrature_degree = -1);

/// Energy seminorm of a scalar cell/facet coefficient pair:
///   ( sum_K ||grad w||_K^2 + h_K^{-1} ||w - wbar||_{dK}^2 )^{1/2}.
/// A matching constant pair lies in the kernel.
double energy_seminorm(const CellSpace& cells, const SkeletonSpace& skeleton,
                       const Mesh& mesh, const std::vector<double>& w,
                       const std::vector<double>& wbar);

/// Energy-seminorm distance between a transport state and a smooth
/// reference: the gradient mismatch over cells plus the scaled trace term
/// h_K^{-1}||c - cbar||_{dK}^2.  The reference drops out of the trace term
/// because it is single-valued across facets.
double transport_energy_error(const TransportSystem& sys,
                              const std::vector<double>& cell_coeff,
                              const std::vector<double>& facet_coeff,
                              const std::function<Vec2(const Vec2&)>& exact_grad);

// ---------------------------------------------------------------------------
// Reference problem builders
// ---------------------------------------------------------------------------

/// Outward-normal component of the reference velocity at an outer-boundary
/// point of the unit square; throws if the point is not on the boundary.
double reference_normal_velocity(const ReferenceFlow& flow, const Vec2& x,
                                 Region region);

/// Flow problem solved by the reference fields: essential velocity data on
/// the free-flow boundary, normal-flux data on the porous boundary, and the
/// zero-mean pressure gauge.
FlowProblem reference_flow_problem(const ReferenceFlow& flow);

/// Transport problem solved by the travelling-wave reference concentration:
/// constant anisotropic diffusion, the matching interior source (the
/// region split sits at y = split_y), and total-flux boundary data on the
/// whole outer boundary.
TransportProblem reference_transport_problem(const ReferenceFlow& flow,
                                             const ReferenceTransport& ref,
                                             double split_y);

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

struct StudyOptions {
  int velocity_degree = 2;       ///< cell velocity degree k (pressure k-1)
  int concentration_degree = 1;  ///< cell concentration degree
  std::vector<int> mesh_sizes = {4, 8, 16, 32, 64};  ///< nx = ny ladder
  DiagonalPattern pattern = DiagonalPattern::Crossed;
  double final_time = 1.0;
  double max_dt = 1e-3;  ///< dt = min(max_dt, h^2/4), snapped to divide T
  bool with_transport = true;
  double mu = 1.0;
  double kappa = 1.0;
  double flow_penalty = -1.0;       ///< negative selects the default
  double transport_penalty = -1.0;  ///< negative selects the default
  int energy_samples = 200;  ///< sample count for the time integral
};

struct StudyLevel {
  double h = 0.0;
  int elements = 0;
  double dt = 0.0;
  int steps = 0;
  double velocity_error = 0.0;
  double pressure_error = 0.0;
  double concentration_error = 0.0;  ///< L2 at the final time
  double energy_error = 0.0;         ///< time-integrated energy seminorm
  FlowReport conservation;
  double mean_multiplier = 0.0;
  double drift = 0.0;  ///< worst conservation-audit drift of the time loop
};

struct StudyReport {
  std::vector<StudyLevel> levels;
  RateTable velocity;
  RateTable pressure;
  RateTable concentration;  ///< empty when transport is disabled
  RateTable energy;         ///< empty when transport is disabled
};

/// Solve the reference problem on every level of the mesh ladder and report
/// errors and observed rates.  Needs at least two levels for a rate; full
/// studies use three or more.
StudyReport convergence_study(const StudyOptions& options);

// ---------------------------------------------------------------------------
// Compatibility audit
// ---------------------------------------------------------------------------

struct CompatibilityOptions {
  int velocity_degree = 2;
  int concentration_degree = 1;
  double dt = 1e-3;
  double final_time = 1.0;
  double background = 1.0;         ///< the uniform concentration value
  double flow_penalty = -1.0;      ///< negative selects the default
  double transport_penalty = -1.0; ///< negative selects the default
};

struct CompatibilityReport {
  FlowReport flow;
  double mean_multiplier = 0.0;
  double constant_error = 0.0;  ///< ||background - c_h||_{L2} at the end
  double max_drift = 0.0;       ///< worst conservation-audit drift
  int steps = 0;
  bool pass = false;
  std::vector<ConservationSample> audit;  ///< per-step mass audit rows
};

/// Solve the flow problem, then advect the uniform background concentration
/// with the compatible interior source -background * mass_source in the
/// porous region and boundary flux data -background * u.n, and measure the
/// deviation from the constant after time stepping to the final time.
///
/// Throws std::invalid_argument if the mass source is nonzero while the
/// concentration degree exceeds velocity degree - 1: the projected source
/// then fails to cancel the divergence of the discrete flow within the
/// concentration test space and a uniform state drifts at O(1).
CompatibilityReport compatibility_audit(const Mesh& mesh,
                                        const FlowProblem& flow_problem,
                                        const CompatibilityOptions& options);

}  // namespace sdt
