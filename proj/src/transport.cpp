/// @file transport.cpp
/// @brief Assembly and time stepping of the transport discretization.

#include "sdt/transport.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdt {

TransportBC zero_flux_bc(BoundaryLabel where) {
  TransportBC bc;
  bc.kind = TransportBC::Kind::ZeroFlux;
  bc.where = where;
  return bc;
}

TransportBC flux_data_bc(
    BoundaryLabel where,
    std::function<double(const Vec2&, double, const Vec2&, double)> g) {
  TransportBC bc;
  bc.kind = TransportBC::Kind::FluxData;
  bc.where = where;
  bc.data = std::move(g);
  return bc;
}

TransportBC outflow_bc(BoundaryLabel where) {
  TransportBC bc;
  bc.kind = TransportBC::Kind::Outflow;
  bc.where = where;
  return bc;
}

int coupled_quadrature_degree(int flow_degree, int transport_degree) {
  return std::max({2 * flow_degree + 2, 2 * transport_degree + 2,
                   flow_degree + 2 * transport_degree + 1});
}

namespace {

std::vector<const TransportBC*> resolve_transport_bcs(
    const Mesh& mesh, const std::vector<TransportBC>& bcs) {
  std::vector<const TransportBC*> resolved(
      static_cast<size_t>(mesh.n_facets()), nullptr);
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    if (facet.kind != FacetKind::Boundary) continue;
    for (const TransportBC& bc : bcs) {
      if (!mesh.boundary_matches(f, bc.where)) continue;
      if (resolved[static_cast<size_t>(f)] != nullptr)
        throw std::invalid_argument(
            "overlapping transport boundary conditions on label " +
            to_string(facet.label));
      resolved[static_cast<size_t>(f)] = &bc;
    }
    if (resolved[static_cast<size_t>(f)] == nullptr)
      throw std::invalid_argument(
          "no transport boundary condition covers label " +
          to_string(facet.label));
  }
  return resolved;
}

/// Inflow classification of a boundary-of-cell quadrature point; grazing
/// values count as outflow so the upwind term never divides the facet
/// inconsistently between the two sides.
bool is_inflow(double un) {
  return un < -1e-12 * std::max(1.0, std::abs(un));
}

}  // namespace

TransportSystem build_transport_system(const FlowSystem& flow_sys,
                                       const TransportDiscretization& disc) {
  if (disc.degree < 1 || disc.degree > 4)
    throw std::invalid_argument("transport degree must be in [1, 4]");
  const int needed =
      coupled_quadrature_degree(flow_sys.disc.degree, disc.degree);
  if (flow_sys.tri_rule.degree < needed)
    throw std::invalid_argument(
        "the flow system's quadrature rule is too coarse for this transport "
        "degree; build the flow system with quadrature degree >= " +
        std::to_string(needed));

  TransportSystem sys;
  sys.mesh = flow_sys.mesh;
  sys.flow = &flow_sys;
  sys.disc = disc;
  sys.beta = disc.penalty > 0.0 ? disc.penalty
                                : 6.0 * disc.degree * disc.degree;
  sys.conc = build_cell_space(*sys.mesh, disc.degree, 1);
  sys.facet_conc = build_skeleton_space(*sys.mesh, disc.degree, 1,
                                        Continuity::Continuous,
                                        SkeletonRestriction::All);
  sys.tri_rule = flow_sys.tri_rule;
  sys.seg_rule = flow_sys.seg_rule;
  sys.off_c = 0;
  sys.off_cbar = sys.conc.n_dofs();
  sys.n_total = sys.off_cbar + sys.facet_conc.n_dofs();
  return sys;
}

TransportOperator assemble_transport_operator(const TransportSystem& sys,
                                              const TransportProblem& problem,
                                              const FlowSolution& flow_sol) {
  if (!problem.diffusion)
    throw std::invalid_argument("transport problem has no diffusion tensor");
  const Mesh& mesh = *sys.mesh;
  const FlowSystem& flow = *sys.flow;
  const std::vector<const TransportBC*> facet_bc =
      resolve_transport_bcs(mesh, problem.bcs);

  const BasisTable c_vol = tabulate(sys.conc.basis, sys.tri_rule);
  const TraceTable c_trace = build_trace_table(sys.conc.basis, sys.seg_rule);
  const BasisTable cbar_seg = tabulate(sys.facet_conc.basis, sys.seg_rule);
  const BasisTable u_vol = tabulate(flow.velocity.basis, sys.tri_rule);
  const TraceTable u_trace = build_trace_table(flow.velocity.basis, sys.seg_rule);

  const int nbc = sys.conc.basis.size();
  const int nbb = sys.facet_conc.basis.size();
  const int nbu = flow.velocity.basis.size();
  const int n = sys.n_total;

  std::vector<Eigen::Triplet<double>> tm, ta, td;
  tm.reserve(static_cast<size_t>(mesh.n_cells()) * static_cast<size_t>(nbc * nbc));
  ta.reserve(static_cast<size_t>(mesh.n_cells()) *
             static_cast<size_t>(nbc * nbc + 6 * (nbc + nbb) * (nbc + nbb)));
  td.reserve(ta.capacity());

  std::vector<Vec2> grad_phys(static_cast<size_t>(std::max(nbc, nbu)));

  // ---- volume terms --------------------------------------------------------
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<size_t>(c)];
    const CellMap map = cell_map(mesh, c);
    const int ubase = flow.velocity.cell_offset(c);
    const int cbase = sys.off_c + sys.conc.cell_offset(c);

    Eigen::MatrixXd mloc = Eigen::MatrixXd::Zero(nbc, nbc);
    Eigen::MatrixXd aloc = Eigen::MatrixXd::Zero(nbc, nbc);
    Eigen::MatrixXd dloc = Eigen::MatrixXd::Zero(nbc, nbc);

    for (int q = 0; q < sys.tri_rule.size(); ++q) {
      const double w = sys.tri_rule.weights[static_cast<size_t>(q)] * map.det;
      const Vec2 x = map.to_physical(sys.tri_rule.points[static_cast<size_t>(q)]);
      Vec2 u;
      for (int i = 0; i < nbu; ++i) {
        u.x += flow_sol.u[static_cast<size_t>(ubase + 2 * i + 0)] * u_vol.value(q, i);
        u.y += flow_sol.u[static_cast<size_t>(ubase + 2 * i + 1)] * u_vol.value(q, i);
      }
      for (int i = 0; i < nbc; ++i)
        grad_phys[static_cast<size_t>(i)] = map.grad_to_physical(c_vol.grad(q, i));
      const double phi = problem.porosity ? problem.porosity(x, cell.region) : 1.0;
      const SymTensor dt = problem.diffusion(x, cell.region, u);

      for (int i = 0; i < nbc; ++i) {
        const Vec2 gi = grad_phys[static_cast<size_t>(i)];
        const double u_dot_gi = u.dot(gi);
        for (int j = 0; j < nbc; ++j) {
          const double pj = c_vol.value(q, j);
          mloc(i, j) += w * phi * c_vol.value(q, i) * pj;
          aloc(i, j) -= w * pj * u_dot_gi;  // -(c u, grad w)
          dloc(i, j) += w * dt.apply(grad_phys[static_cast<size_t>(j)]).dot(gi);
        }
      }
    }

    for (int i = 0; i < nbc; ++i)
      for (int j = 0; j < nbc; ++j) {
        if (mloc(i, j) != 0.0) tm.emplace_back(cbase + i, cbase + j, mloc(i, j));
        if (aloc(i, j) != 0.0) ta.emplace_back(cbase + i, cbase + j, aloc(i, j));
        if (dloc(i, j) != 0.0) td.emplace_back(cbase + i, cbase + j, dloc(i, j));
      }
  }

  // ---- facet terms, cell side by cell side ---------------------------------
  const int nloc = nbc + nbb;
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    const bool outflow =
        facet.kind == FacetKind::Boundary &&
        facet_bc[static_cast<size_t>(f)]->kind == TransportBC::Kind::Outflow;
    const Vec2 va = mesh.vertices[static_cast<size_t>(facet.v[0])];
    const Vec2 vb = mesh.vertices[static_cast<size_t>(facet.v[1])];

    const int nsides = facet.cell[1] >= 0 ? 2 : 1;
    for (int side = 0; side < nsides; ++side) {
      const int c = facet.cell[side];
      const Cell& cell = mesh.cells[static_cast<size_t>(c)];
      const int variant = trace_variant(mesh, f, side);
      const Vec2 nrm = mesh.outward_normal(f, side);
      const CellMap map = cell_map(mesh, c);
      const int ubase = flow.velocity.cell_offset(c);
      const double pen_scale = sys.beta / cell.diameter;

      Eigen::MatrixXd aside = Eigen::MatrixXd::Zero(nloc, nloc);
      Eigen::MatrixXd dside = Eigen::MatrixXd::Zero(nloc, nloc);

      for (int q = 0; q < sys.seg_rule.size(); ++q) {
        const double w = sys.seg_rule.weights[static_cast<size_t>(q)] * facet.length;
        const double s = sys.seg_rule.points[static_cast<size_t>(q)].x;
        const Vec2 x{va.x + s * (vb.x - va.x), va.y + s * (vb.y - va.y)};
        Vec2 u;
        for (int i = 0; i < nbu; ++i) {
          u.x += flow_sol.u[static_cast<size_t>(ubase + 2 * i + 0)] *
                 u_trace.value(variant, q, i);
          u.y += flow_sol.u[static_cast<size_t>(ubase + 2 * i + 1)] *
                 u_trace.value(variant, q, i);
        }
        const double un = u.dot(nrm);
        for (int i = 0; i < nbc; ++i)
          grad_phys[static_cast<size_t>(i)] =
              map.grad_to_physical(c_trace.grad(variant, q, i));
        const SymTensor dt = problem.diffusion(x, cell.region, u);
        const double ndn = dt.normal_component(nrm);

        // Advective flux <c un, w - wbar>; on an outflow facet the facet
        // unknown is left out so the flux simply exits.
        for (int j = 0; j < nbc; ++j) {
          const double cj = c_trace.value(variant, q, j) * un * w;
          for (int i = 0; i < nbc; ++i)
            aside(i, j) += cj * c_trace.value(variant, q, i);
          if (!outflow)
            for (int m = 0; m < nbb; ++m)
              aside(nbc + m, j) -= cj * cbar_seg.value(q, m);
        }

        // Upwind exchange -<un (c - cbar), w - wbar> on the inflow part.
        if (is_inflow(un) && !outflow) {
          for (int a = 0; a < nloc; ++a) {
            const double ta_val = a < nbc ? c_trace.value(variant, q, a)
                                          : -cbar_seg.value(q, a - nbc);
            for (int b = 0; b < nloc; ++b) {
              const double tb_val = b < nbc ? c_trace.value(variant, q, b)
                                            : -cbar_seg.value(q, b - nbc);
              aside(a, b) -= w * un * ta_val * tb_val;
            }
          }
        }

        // Diffusive consistency -<(D grad c).n, w - wbar> plus its transpose,
        // and the penalty (beta/h)(n.D n)(c - cbar)(w - wbar).
        for (int j = 0; j < nbc; ++j) {
          const double flux =
              dt.apply(grad_phys[static_cast<size_t>(j)]).dot(nrm) * w;
          for (int i = 0; i < nbc; ++i) {
            const double v = -flux * c_trace.value(variant, q, i);
            dside(i, j) += v;
            dside(j, i) += v;
          }
          for (int m = 0; m < nbb; ++m) {
            const double v = flux * cbar_seg.value(q, m);
            dside(nbc + m, j) += v;
            dside(j, nbc + m) += v;
          }
        }
        for (int a = 0; a < nloc; ++a) {
          const double ta_val = a < nbc ? c_trace.value(variant, q, a)
                                        : -cbar_seg.value(q, a - nbc);
          for (int b = 0; b < nloc; ++b) {
            const double tb_val = b < nbc ? c_trace.value(variant, q, b)
                                          : -cbar_seg.value(q, b - nbc);
            dside(a, b) += w * pen_scale * ndn * ta_val * tb_val;
          }
        }
      }

      std::vector<int> loc(static_cast<size_t>(nloc));
      for (int j = 0; j < nbc; ++j)
        loc[static_cast<size_t>(j)] = sys.off_c + sys.conc.cell_offset(c) + j;
      const std::vector<int>& fd = sys.facet_conc.facet_dofs(f);
      for (int m = 0; m < nbb; ++m)
        loc[static_cast<size_t>(nbc + m)] =
            sys.off_cbar + fd[static_cast<size_t>(m)];
      for (int a = 0; a < nloc; ++a)
        for (int b = 0; b < nloc; ++b) {
          if (aside(a, b) != 0.0)
            ta.emplace_back(loc[static_cast<size_t>(a)],
                            loc[static_cast<size_t>(b)], aside(a, b));
          if (dside(a, b) != 0.0)
            td.emplace_back(loc[static_cast<size_t>(a)],
                            loc[static_cast<size_t>(b)], dside(a, b));
        }
    }
  }

  TransportOperator op;
  op.mass.resize(n, n);
  op.advection.resize(n, n);
  op.diffusion.resize(n, n);
  op.mass.setFromTriplets(tm.begin(), tm.end());
  op.advection.setFromTriplets(ta.begin(), ta.end());
  op.diffusion.setFromTriplets(td.begin(), td.end());
  return op;
}

Eigen::VectorXd assemble_transport_rhs(const TransportSystem& sys,
                                       const TransportProblem& problem,
                                       const FlowSolution& flow_sol, double t) {
  const Mesh& mesh = *sys.mesh;
  const FlowSystem& flow = *sys.flow;
  const std::vector<const TransportBC*> facet_bc =
      resolve_transport_bcs(mesh, problem.bcs);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.n_total);

  if (problem.source) {
    const BasisTable c_vol = tabulate(sys.conc.basis, sys.tri_rule);
    const int nbc = sys.conc.basis.size();
    for (int c = 0; c < mesh.n_cells(); ++c) {
      const CellMap map = cell_map(mesh, c);
      const int cbase = sys.off_c + sys.conc.cell_offset(c);
      for (int q = 0; q < sys.tri_rule.size(); ++q) {
        const double w = sys.tri_rule.weights[static_cast<size_t>(q)] * map.det;
        const double fval = problem.source(
            map.to_physical(sys.tri_rule.points[static_cast<size_t>(q)]), t);
        for (int i = 0; i < nbc; ++i)
          rhs(cbase + i) += w * fval * c_vol.value(q, i);
      }
    }
  }

  bool any_flux_data = false;
  for (const TransportBC& bc : problem.bcs)
    any_flux_data = any_flux_data || bc.kind == TransportBC::Kind::FluxData;
  if (any_flux_data) {
    const TraceTable u_trace =
        build_trace_table(flow.velocity.basis, sys.seg_rule);
    const BasisTable cbar_seg = tabulate(sys.facet_conc.basis, sys.seg_rule);
    const int nbu = flow.velocity.basis.size();
    const int nbb = sys.facet_conc.basis.size();
    for (int f = 0; f < mesh.n_facets(); ++f) {
      const Facet& facet = mesh.facets[static_cast<size_t>(f)];
      if (facet.kind != FacetKind::Boundary) continue;
      const TransportBC* bc = facet_bc[static_cast<size_t>(f)];
      if (bc->kind != TransportBC::Kind::FluxData) continue;
      const int c = facet.cell[0];
      const int variant = trace_variant(mesh, f, 0);
      const Vec2 nrm = mesh.outward_normal(f, 0);
      const int ubase = flow.velocity.cell_offset(c);
      const Vec2 va = mesh.vertices[static_cast<size_t>(facet.v[0])];
      const Vec2 vb = mesh.vertices[static_cast<size_t>(facet.v[1])];
      const std::vector<int>& fd = sys.facet_conc.facet_dofs(f);
      for (int q = 0; q < sys.seg_rule.size(); ++q) {
        const double w =
            sys.seg_rule.weights[static_cast<size_t>(q)] * facet.length;
        const double s = sys.seg_rule.points[static_cast<size_t>(q)].x;
        const Vec2 x{va.x + s * (vb.x - va.x), va.y + s * (vb.y - va.y)};
        Vec2 u;
        for (int i = 0; i < nbu; ++i) {
          u.x += flow_sol.u[static_cast<size_t>(ubase + 2 * i + 0)] *
                 u_trace.value(variant, q, i);
          u.y += flow_sol.u[static_cast<size_t>(ubase + 2 * i + 1)] *
                 u_trace.value(variant, q, i);
        }
        const double g = bc->data(x, t, nrm, u.dot(nrm));
        for (int m = 0; m < nbb; ++m)
          rhs(sys.off_cbar + fd[static_cast<size_t>(m)]) +=
              w * g * cbar_seg.value(q, m);
      }
    }
  }
  return rhs;
}

Eigen::VectorXd initial_transport_state(const TransportSystem& sys,
                                        const TransportProblem& problem) {
  if (!problem.initial)
    throw std::invalid_argument("transport problem has no initial state");
  const FieldFn field = [&problem](const Vec2& x, int) {
    return problem.initial(x);
  };
  const std::vector<double> c =
      l2_project_cells(sys.conc, *sys.mesh, sys.tri_rule, field);
  const std::vector<double> cbar =
      l2_project_skeleton(sys.facet_conc, *sys.mesh, sys.seg_rule, field);
  Eigen::VectorXd z(sys.n_total);
  for (size_t i = 0; i < c.size(); ++i)
    z(sys.off_c + static_cast<int>(i)) = c[i];
  for (size_t i = 0; i < cbar.size(); ++i)
    z(sys.off_cbar + static_cast<int>(i)) = cbar[i];
  return z;
}

// ---------------------------------------------------------------------------
// Time integration
// ---------------------------------------------------------------------------

CrankNicolson::CrankNicolson(const Eigen::SparseMatrix<double>& mass,
                             const Eigen::SparseMatrix<double>& stiffness,
                             double dt)
    : dt_(dt > 0.0 ? dt
                   : throw std::invalid_argument("time step must be positive")),
      rhs_matrix_(mass * (1.0 / dt) - 0.5 * stiffness),
      factor_(mass * (1.0 / dt) + 0.5 * stiffness) {}

Eigen::VectorXd CrankNicolson::step(const Eigen::VectorXd& z,
                                    const Eigen::VectorXd& f_n,
                                    const Eigen::VectorXd& f_np1) const {
  return factor_.solve(rhs_matrix_ * z + 0.5 * (f_n + f_np1));
}

TransportStepper::TransportStepper(const TransportSystem& sys,
                                   const TransportProblem& problem,
                                   const FlowSolution& flow_sol, double dt)
    : sys_(sys),
      problem_(problem),
      flow_sol_(flow_sol),
      dt_(dt),
      op_(assemble_transport_operator(sys, problem, flow_sol)),
      cn_(op_.mass, op_.advection + op_.diffusion, dt) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys_.n_total);
  mass_row_ = op_.mass * ones;  // the mass matrix is symmetric
  stiffness_row_ =
      Eigen::SparseMatrix<double>((op_.advection + op_.diffusion).transpose()) *
      ones;
  z_ = initial_transport_state(sys_, problem_);
  f_current_ = assemble_transport_rhs(sys_, problem_, flow_sol_, 0.0);
  expected_ = mass();
  audit_.push_back({0.0, expected_, expected_, 0.0});
}

double TransportStepper::time() const {
  return dt_ * static_cast<double>(steps_done_);
}

double TransportStepper::mass() const { return mass_row_.dot(z_); }

void TransportStepper::advance(int steps) {
  for (int s = 0; s < steps; ++s) {
    const double t_next = dt_ * static_cast<double>(steps_done_ + 1);
    const Eigen::VectorXd f_next =
        assemble_transport_rhs(sys_, problem_, flow_sol_, t_next);
    const Eigen::VectorXd z_next = cn_.step(z_, f_current_, f_next);
    expected_ += dt_ * (0.5 * (f_current_.sum() + f_next.sum()) -
                        0.5 * stiffness_row_.dot(z_ + z_next));
    z_ = z_next;
    f_current_ = f_next;
    ++steps_done_;
    const double m = mass();
    audit_.push_back({t_next, m, expected_, std::abs(m - expected_)});
  }
}

double TransportStepper::max_drift() const {
  double d = 0.0;
  for (const ConservationSample& s : audit_) d = std::max(d, s.drift);
  return d;
}

std::vector<double> TransportStepper::cell_coefficients() const {
  return std::vector<double>(z_.data() + sys_.off_c,
                             z_.data() + sys_.off_c + sys_.conc.n_dofs());
}

std::vector<double> TransportStepper::facet_coefficients() const {
  return std::vector<double>(
      z_.data() + sys_.off_cbar,
      z_.data() + sys_.off_cbar + sys_.facet_conc.n_dofs());
}

}  // namespace sdt
