/// @file verify.cpp
/// @brief Norms, rate tables, reference problems, and the verification
///        drivers (refinement studies and the uniform-background audit).

#include "sdt/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

namespace sdt {

// ---------------------------------------------------------------------------
// Rate tables
// ---------------------------------------------------------------------------

void RateTable::add(double h, int elements, double error) {
  if (!(h > 0.0)) throw std::invalid_argument("rate table: h must be positive");
  if (!(error > 0.0))
    throw std::invalid_argument("rate table: error must be positive");
  if (!rows.empty() && !(h < rows.back().h))
    throw std::invalid_argument("rate table: h must decrease strictly");
  RateRow row;
  row.h = h;
  row.elements = elements;
  row.error = error;
  if (!rows.empty()) {
    const RateRow& prev = rows.back();
    row.rate = std::log(prev.error / error) / std::log(prev.h / h);
  }
  rows.push_back(row);
}

double RateTable::final_rate() const {
  if (rows.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return rows.back().rate;
}

std::string to_csv(const RateTable& table) {
  std::string out = "h,elements,error,rate\n";
  char buf[160];
  for (const RateRow& row : table.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,", row.h, row.elements,
                  row.error);
    out += buf;
    if (std::isfinite(row.rate)) {
      std::snprintf(buf, sizeof buf, "%.17g", row.rate);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string to_text(const RateTable& table) {
  std::string out;
  if (!table.label.empty()) {
    out += table.label;
    out += '\n';
  }
  out += "         h   elements         error    rate\n";
  char buf[160];
  for (const RateRow& row : table.rows) {
    if (std::isfinite(row.rate)) {
      std::snprintf(buf, sizeof buf, "%10.3e %10d %13.4e %7.2f\n", row.h,
                    row.elements, row.error, row.rate);
    } else {
      std::snprintf(buf, sizeof buf, "%10.3e %10d %13.4e %7s\n", row.h,
                    row.elements, row.error, "-");
    }
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

double l2_error_cells(const CellSpace& space, const Mesh& mesh,
                      const std::vector<double>& coeff, const FieldFn& exact,
                      int quadrature_degree) {
  if (static_cast<int>(coeff.size()) != space.n_dofs())
    throw std::invalid_argument("l2_error_cells: coefficient size mismatch");
  const int qd = quadrature_degree > 0
                     ? quadrature_degree
                     : std::min(2 * (space.degree + 2), 20);
  const QuadratureRule tri = quadrature_triangle(qd);
  const BasisTable table = tabulate(space.basis, tri);
  double acc = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const CellMap map = cell_map(mesh, c);
    const int base = space.cell_offset(c);
    for (int q = 0; q < tri.size(); ++q) {
      const double w = tri.weights[static_cast<size_t>(q)] * map.det;
      const Vec2 x = map.to_physical(tri.points[static_cast<size_t>(q)]);
      for (int d = 0; d < space.rank; ++d) {
        double v = -exact(x, d);
        for (int i = 0; i < space.basis.size(); ++i)
          v += coeff[static_cast<size_t>(base + space.local_dof(i, d))] *
               table.value(q, i);
        acc += w * v * v;
      }
    }
  }
  return std::sqrt(acc);
}

namespace {

/// Shared accumulation for the energy seminorm: gradient term over cells
/// (optionally against a reference gradient) plus the h_K^{-1}-scaled
/// cell-minus-facet trace term over every cell boundary.
double energy_squared(const CellSpace& cells, const SkeletonSpace& skeleton,
                      const Mesh& mesh, const std::vector<double>& w,
                      const std::vector<double>& wbar,
                      const std::function<Vec2(const Vec2&)>* exact_grad) {
  if (cells.rank != 1 || skeleton.rank != 1)
    throw std::invalid_argument("energy seminorm expects scalar spaces");
  if (static_cast<int>(w.size()) != cells.n_dofs() ||
      static_cast<int>(wbar.size()) != skeleton.n_dofs())
    throw std::invalid_argument("energy seminorm: coefficient size mismatch");

  const int qd = std::min(2 * cells.degree + 4, 20);
  const QuadratureRule tri = quadrature_triangle(qd);
  const QuadratureRule seg = quadrature_segment(qd);
  const BasisTable vol = tabulate(cells.basis, tri);
  const TraceTable trace = build_trace_table(cells.basis, seg);
  const BasisTable bar = tabulate(skeleton.basis, seg);
  const int nbc = cells.basis.size();
  const int nbb = skeleton.basis.size();

  double acc = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<size_t>(c)];
    const CellMap map = cell_map(mesh, c);
    const int base = cells.cell_offset(c);

    for (int q = 0; q < tri.size(); ++q) {
      const double wq = tri.weights[static_cast<size_t>(q)] * map.det;
      Vec2 g;
      for (int i = 0; i < nbc; ++i) {
        const Vec2 gi = map.grad_to_physical(vol.grad(q, i));
        const double ci = w[static_cast<size_t>(base + i)];
        g.x += ci * gi.x;
        g.y += ci * gi.y;
      }
      if (exact_grad) {
        const Vec2 ge =
            (*exact_grad)(map.to_physical(tri.points[static_cast<size_t>(q)]));
        g.x -= ge.x;
        g.y -= ge.y;
      }
      acc += wq * (g.x * g.x + g.y * g.y);
    }

    for (int e = 0; e < 3; ++e) {
      const int f = cell.facet[static_cast<size_t>(e)];
      if (!skeleton.is_active(f)) continue;
      const int side = mesh.facet_side(f, c);
      const int variant = trace_variant(mesh, f, side);
      const std::vector<int>& fdofs = skeleton.facet_dofs(f);
      const double scale =
          mesh.facets[static_cast<size_t>(f)].length / cell.diameter;
      for (int q = 0; q < seg.size(); ++q) {
        const double wq = seg.weights[static_cast<size_t>(q)] * scale;
        double d = 0.0;
        for (int i = 0; i < nbc; ++i)
          d += w[static_cast<size_t>(base + i)] * trace.value(variant, q, i);
        for (int m = 0; m < nbb; ++m)
          d -= wbar[static_cast<size_t>(fdofs[static_cast<size_t>(m)])] *
               bar.value(q, m);
        acc += wq * d * d;
      }
    }
  }
  return acc;
}

}  // namespace

double energy_seminorm(const CellSpace& cells, const SkeletonSpace& skeleton,
                       const Mesh& mesh, const std::vector<double>& w,
                       const std::vector<double>& wbar) {
  return std::sqrt(energy_squared(cells, skeleton, mesh, w, wbar, nullptr));
}

double transport_energy_error(
    const TransportSystem& sys, const std::vector<double>& cell_coeff,
    const std::vector<double>& facet_coeff,
    const std::function<Vec2(const Vec2&)>& exact_grad) {
  return std::sqrt(energy_squared(sys.conc, sys.facet_conc, *sys.mesh,
                                  cell_coeff, facet_coeff, &exact_grad));
}

// ---------------------------------------------------------------------------
// Reference problem builders
// ---------------------------------------------------------------------------

double reference_normal_velocity(const ReferenceFlow& flow, const Vec2& x,
                                 Region region) {
  const Vec2 u = flow.velocity(x, region);
  const double tol = 1e-12;
  if (x.x < tol) return -u.x;
  if (x.x > 1.0 - tol) return u.x;
  if (x.y < tol) return -u.y;
  if (x.y > 1.0 - tol) return u.y;
  throw std::invalid_argument(
      "reference_normal_velocity: point is not on the outer boundary");
}

FlowProblem reference_flow_problem(const ReferenceFlow& flow) {
  FlowProblem prob;
  prob.mu = flow.mu;
  prob.kappa = [flow](const Vec2&, Region) { return flow.kappa; };
  prob.alpha = flow.alpha();
  prob.body_force = [flow](const Vec2& x) { return flow.body_force(x); };
  prob.mass_source = [flow](const Vec2& x) { return flow.mass_source(x); };
  prob.bcs.push_back(velocity_dirichlet_bc(
      BoundaryLabel::StokesAll,
      [flow](const Vec2& x) { return flow.velocity(x, Region::Stokes); }));
  prob.bcs.push_back(
      normal_flux_bc(BoundaryLabel::DarcyAll, [flow](const Vec2& x) {
        return reference_normal_velocity(flow, x, Region::Darcy);
      }));
  prob.gauge = PressureGauge::ZeroMean;
  return prob;
}

TransportProblem reference_transport_problem(const ReferenceFlow& flow,
                                             const ReferenceTransport& ref,
                                             double split_y) {
  // Constant anisotropic diffusion used throughout the refinement studies.
  const double dxx = 1e-2, dxy = 5e-3, dyy = 2e-2;

  TransportProblem prob;
  prob.diffusion = [dxx, dxy, dyy](const Vec2&, Region, const Vec2&) {
    return SymTensor{dxx, dxy, dyy};
  };
  prob.source = [flow, ref, split_y, dxx, dxy, dyy](const Vec2& x, double t) {
    const Region region = x.y < split_y ? Region::Darcy : Region::Stokes;
    return manufactured_transport_source(flow, ref, x, t, region, 1.0, dxx,
                                         dxy, dyy);
  };
  prob.initial = [ref](const Vec2& x) { return ref.value(x, 0.0); };
  const auto flux = [ref, dxx, dxy, dyy](const Vec2& x, double t,
                                         const Vec2& n, double un) {
    const Vec2 grad = ref.gradient(x, t);
    const SymTensor diff{dxx, dxy, dyy};
    const Vec2 dgrad = diff.apply(grad);
    return dgrad.x * n.x + dgrad.y * n.y - ref.value(x, t) * un;
  };
  prob.bcs.push_back(flux_data_bc(BoundaryLabel::StokesAll, flux));
  prob.bcs.push_back(flux_data_bc(BoundaryLabel::DarcyAll, flux));
  return prob;
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

StudyReport convergence_study(const StudyOptions& options) {
  if (options.mesh_sizes.size() < 2)
    throw std::invalid_argument(
        "convergence study needs at least two refinement levels");
  for (size_t i = 1; i < options.mesh_sizes.size(); ++i)
    if (options.mesh_sizes[i] <= options.mesh_sizes[i - 1])
      throw std::invalid_argument(
          "convergence study mesh sizes must increase strictly");
  if (!(options.final_time > 0.0) || !(options.max_dt > 0.0))
    throw std::invalid_argument(
        "convergence study times must be positive");

  StudyReport report;
  report.velocity.label = "velocity L2 error";
  report.pressure.label = "pressure L2 error";
  report.concentration.label = "concentration L2 error";
  report.energy.label = "concentration energy error (time integrated)";

  const ReferenceFlow flow{options.mu, options.kappa};
  const ReferenceTransport conc;
  const FlowProblem flow_problem = reference_flow_problem(flow);
  const double split_y = 0.5;

  const double split_for_fields = split_y;
  const auto exact_velocity = [flow, split_for_fields](const Vec2& x, int d) {
    const Region region =
        x.y < split_for_fields ? Region::Darcy : Region::Stokes;
    const Vec2 u = flow.velocity(x, region);
    return d == 0 ? u.x : u.y;
  };
  const auto exact_pressure = [flow, split_for_fields](const Vec2& x, int) {
    const Region region =
        x.y < split_for_fields ? Region::Darcy : Region::Stokes;
    return flow.pressure(x, region);
  };

  for (int nx : options.mesh_sizes) {
    const Mesh mesh =
        build_structured_mesh({nx, nx, split_y, options.pattern});
    StudyLevel level;
    level.h = 1.0 / nx;
    level.elements = mesh.n_cells();

    FlowDiscretization flow_disc;
    flow_disc.degree = options.velocity_degree;
    flow_disc.penalty = options.flow_penalty;
    if (options.with_transport)
      flow_disc.quadrature_degree = coupled_quadrature_degree(
          options.velocity_degree, options.concentration_degree);
    const FlowSystem sys =
        build_flow_system(mesh, flow_disc, PressureGauge::ZeroMean);
    const FlowSolution sol = solve_flow(sys, flow_problem);
    level.conservation = check_flow_conservation(sys, flow_problem, sol);
    level.mean_multiplier = sol.mean_multiplier;
    level.velocity_error = l2_error_cells(sys.velocity, mesh, sol.u,
                                          exact_velocity);
    level.pressure_error = l2_error_cells(sys.pressure, mesh, sol.p,
                                          exact_pressure);

    if (options.with_transport) {
      const TransportSystem tsys = build_transport_system(
          sys, TransportDiscretization{options.concentration_degree,
                                       options.transport_penalty});
      const TransportProblem transport_problem =
          reference_transport_problem(flow, conc, split_y);
      const double raw = std::min(options.max_dt, level.h * level.h / 4.0);
      level.steps =
          static_cast<int>(std::ceil(options.final_time / raw - 1e-9));
      level.dt = options.final_time / level.steps;

      TransportStepper stepper(tsys, transport_problem, sol, level.dt);
      const int stride =
          std::max(1, level.steps / std::max(1, options.energy_samples));
      double t_prev = 0.0;
      double e_prev = transport_energy_error(
          tsys, stepper.cell_coefficients(), stepper.facet_coefficients(),
          [&conc](const Vec2& x) { return conc.gradient(x, 0.0); });
      double acc = 0.0;
      int done = 0;
      while (done < level.steps) {
        const int chunk = std::min(stride, level.steps - done);
        stepper.advance(chunk);
        done += chunk;
        const double t_now = level.dt * done;
        const double e_now = transport_energy_error(
            tsys, stepper.cell_coefficients(), stepper.facet_coefficients(),
            [&conc, t_now](const Vec2& x) { return conc.gradient(x, t_now); });
        acc += 0.5 * (e_prev * e_prev + e_now * e_now) * (t_now - t_prev);
        t_prev = t_now;
        e_prev = e_now;
      }
      level.energy_error = std::sqrt(acc);
      const double T = options.final_time;
      level.concentration_error = l2_error_cells(
          tsys.conc, mesh, stepper.cell_coefficients(),
          [&conc, T](const Vec2& x, int) { return conc.value(x, T); });
      level.drift = stepper.max_drift();
    }

    report.velocity.add(level.h, level.elements, level.velocity_error);
    report.pressure.add(level.h, level.elements, level.pressure_error);
    if (options.with_transport) {
      report.concentration.add(level.h, level.elements,
                               level.concentration_error);
      report.energy.add(level.h, level.elements, level.energy_error);
    }
    report.levels.push_back(std::move(level));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Compatibility audit
// ---------------------------------------------------------------------------

CompatibilityReport compatibility_audit(const Mesh& mesh,
                                        const FlowProblem& flow_problem,
                                        const CompatibilityOptions& options) {
  if (!(options.dt > 0.0) || !(options.final_time > 0.0))
    throw std::invalid_argument("compatibility audit times must be positive");

  // A nonzero interior mass source demands concentration degree at most
  // velocity degree - 1; otherwise the source's projection onto the pressure
  // space no longer cancels the divergence of the discrete flow within the
  // concentration test space, and uniform states drift at O(1).
  double source_magnitude = 0.0;
  if (flow_problem.mass_source) {
    const QuadratureRule tri = quadrature_triangle(10);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      if (mesh.cells[static_cast<size_t>(c)].region != Region::Darcy) continue;
      const CellMap map = cell_map(mesh, c);
      for (int q = 0; q < tri.size(); ++q) {
        const Vec2 x = map.to_physical(tri.points[static_cast<size_t>(q)]);
        source_magnitude += tri.weights[static_cast<size_t>(q)] * map.det *
                            std::abs(flow_problem.mass_source(x));
      }
    }
  }
  if (source_magnitude > 1e-12 &&
      options.concentration_degree > options.velocity_degree - 1)
    throw std::invalid_argument(
        "the interior mass source is nonzero, so the concentration degree "
        "must be at most the velocity degree minus one; a higher degree "
        "leaves part of the flow divergence unmatched by the source "
        "projection and a uniform concentration would drift");

  FlowDiscretization flow_disc;
  flow_disc.degree = options.velocity_degree;
  flow_disc.penalty = options.flow_penalty;
  flow_disc.quadrature_degree = coupled_quadrature_degree(
      options.velocity_degree, options.concentration_degree);
  const FlowSystem sys =
      build_flow_system(mesh, flow_disc, flow_problem.gauge);
  const FlowSolution sol = solve_flow(sys, flow_problem);

  CompatibilityReport report;
  report.flow = check_flow_conservation(sys, flow_problem, sol);
  report.mean_multiplier = sol.mean_multiplier;

  const double background = options.background;
  TransportProblem transport_problem;
  transport_problem.diffusion = [](const Vec2&, Region, const Vec2&) {
    return SymTensor{1e-2, 5e-3, 2e-2};
  };
  if (flow_problem.mass_source) {
    const auto mass_source = flow_problem.mass_source;
    const double split_y = mesh.split_y;
    transport_problem.source = [mass_source, split_y, background](
                                   const Vec2& x, double) {
      return x.y < split_y ? -background * mass_source(x) : 0.0;
    };
  }
  transport_problem.initial = [background](const Vec2&) { return background; };
  const auto flux = [background](const Vec2&, double, const Vec2&, double un) {
    return -un * background;
  };
  transport_problem.bcs.push_back(
      flux_data_bc(BoundaryLabel::StokesAll, flux));
  transport_problem.bcs.push_back(flux_data_bc(BoundaryLabel::DarcyAll, flux));

  const TransportSystem tsys = build_transport_system(
      sys, TransportDiscretization{options.concentration_degree,
                                   options.transport_penalty});
  report.steps = std::max(
      1, static_cast<int>(std::lround(options.final_time / options.dt)));
  TransportStepper stepper(tsys, transport_problem, sol,
                           options.final_time / report.steps);
  stepper.advance(report.steps);

  report.constant_error = l2_error_cells(
      tsys.conc, mesh, stepper.cell_coefficients(),
      [background](const Vec2&, int) { return background; });
  report.max_drift = stepper.max_drift();
  report.audit = stepper.audit();
  const double mass_scale =
      std::max(1.0, std::abs(stepper.audit().front().mass));
  report.pass = report.constant_error <= 1e-10 &&
                report.max_drift <= 1e-9 * mass_scale;
  return report;
}

}  // namespace sdt
