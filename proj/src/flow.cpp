/// @file flow.cpp
/// @brief Assembly and solve of the hybridized coupled-flow system.

#include "sdt/flow.hpp"

#include "sdt/linsolve.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace sdt {

FlowBC velocity_dirichlet_bc(BoundaryLabel where,
                             std::function<Vec2(const Vec2&)> g) {
  FlowBC bc;
  bc.kind = FlowBC::Kind::VelocityDirichlet;
  bc.where = where;
  bc.velocity = std::move(g);
  return bc;
}

FlowBC total_stress_zero_bc(BoundaryLabel where) {
  FlowBC bc;
  bc.kind = FlowBC::Kind::TotalStressZero;
  bc.where = where;
  return bc;
}

FlowBC slip_symmetry_bc(BoundaryLabel where) {
  FlowBC bc;
  bc.kind = FlowBC::Kind::SlipSymmetry;
  bc.where = where;
  return bc;
}

FlowBC normal_flux_bc(BoundaryLabel where,
                      std::function<double(const Vec2&)> g) {
  FlowBC bc;
  bc.kind = FlowBC::Kind::NormalFluxData;
  bc.where = where;
  bc.scalar = std::move(g);
  return bc;
}

FlowBC pressure_bc(BoundaryLabel where, std::function<double(const Vec2&)> g) {
  FlowBC bc;
  bc.kind = FlowBC::Kind::PressureData;
  bc.where = where;
  bc.scalar = std::move(g);
  return bc;
}

namespace {

bool free_flow_kind(FlowBC::Kind kind) {
  return kind == FlowBC::Kind::VelocityDirichlet ||
         kind == FlowBC::Kind::TotalStressZero ||
         kind == FlowBC::Kind::SlipSymmetry;
}

bool pressure_fixing_kind(FlowBC::Kind kind) {
  return kind == FlowBC::Kind::TotalStressZero ||
         kind == FlowBC::Kind::PressureData;
}

/// Essential-dof bookkeeping with conflict detection at shared nodes.
class ConstraintSet {
 public:
  explicit ConstraintSet(int n) : mask_(static_cast<size_t>(n), 0),
                                  value_(static_cast<size_t>(n), 0.0) {}

  void set(int dof, double v) {
    if (mask_[static_cast<size_t>(dof)]) {
      const double old = value_[static_cast<size_t>(dof)];
      if (std::abs(old - v) > 1e-12 * std::max(1.0, std::abs(v)))
        throw std::runtime_error(
            "conflicting essential boundary values at a shared facet node");
      return;
    }
    mask_[static_cast<size_t>(dof)] = 1;
    value_[static_cast<size_t>(dof)] = v;
  }

  bool constrained(int dof) const { return mask_[static_cast<size_t>(dof)] != 0; }
  double value(int dof) const { return value_[static_cast<size_t>(dof)]; }
  std::vector<char> take_mask() && { return std::move(mask_); }
  const std::vector<double>& values() const { return value_; }

 private:
  std::vector<char> mask_;
  std::vector<double> value_;
};

/// One matched boundary condition per boundary facet.
std::vector<const FlowBC*> resolve_boundary_conditions(
    const Mesh& mesh, const std::vector<FlowBC>& bcs) {
  std::vector<const FlowBC*> resolved(static_cast<size_t>(mesh.n_facets()),
                                      nullptr);
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    if (facet.kind != FacetKind::Boundary) continue;
    for (const FlowBC& bc : bcs) {
      if (!mesh.boundary_matches(f, bc.where)) continue;
      if (resolved[static_cast<size_t>(f)] != nullptr)
        throw std::invalid_argument(
            "overlapping flow boundary conditions on label " +
            to_string(facet.label));
      resolved[static_cast<size_t>(f)] = &bc;
    }
    if (resolved[static_cast<size_t>(f)] == nullptr)
      throw std::invalid_argument("no flow boundary condition covers label " +
                                  to_string(facet.label));
    const Region region =
        mesh.cells[static_cast<size_t>(facet.cell[0])].region;
    const FlowBC::Kind kind = resolved[static_cast<size_t>(f)]->kind;
    if (free_flow_kind(kind) != (region == Region::Stokes))
      throw std::invalid_argument(
          "flow boundary condition kind does not match the region of label " +
          to_string(facet.label));
  }
  return resolved;
}

struct DofHelper {
  const FlowSystem& sys;

  int u(int c, int i, int d) const {
    return sys.off_u + sys.velocity.cell_offset(c) + sys.velocity.local_dof(i, d);
  }
  int p(int c, int m) const {
    return sys.off_p + sys.pressure.cell_offset(c) + m;
  }
  int ubar(int f, int local) const {
    return sys.off_ubar + sys.facet_velocity.facet_dofs(f)[static_cast<size_t>(local)];
  }
  int ps(int f, int m) const {
    return sys.off_ps + sys.facet_pressure_s.facet_dofs(f)[static_cast<size_t>(m)];
  }
  int pd(int f, int m) const {
    return sys.off_pd + sys.facet_pressure_d.facet_dofs(f)[static_cast<size_t>(m)];
  }
};

}  // namespace

FlowSystem build_flow_system(const Mesh& mesh, const FlowDiscretization& disc,
                             PressureGauge gauge) {
  if (disc.degree < 2 || disc.degree > 4)
    throw std::invalid_argument("flow velocity degree must be in [2, 4]");
  FlowSystem sys;
  sys.mesh = &mesh;
  sys.disc = disc;
  sys.beta = disc.penalty > 0.0
                 ? disc.penalty
                 : 10.0 * disc.degree * disc.degree;
  const int quad_degree =
      disc.quadrature_degree > 0 ? disc.quadrature_degree : 2 * disc.degree + 2;

  sys.velocity = build_cell_space(mesh, disc.degree, 2);
  sys.pressure = build_cell_space(mesh, disc.degree - 1, 1);
  sys.facet_velocity =
      build_skeleton_space(mesh, disc.degree, 2, Continuity::Continuous,
                           SkeletonRestriction::StokesRegion);
  sys.facet_pressure_s =
      build_skeleton_space(mesh, disc.degree, 1, Continuity::Discontinuous,
                           SkeletonRestriction::StokesRegion);
  sys.facet_pressure_d =
      build_skeleton_space(mesh, disc.degree, 1, Continuity::Discontinuous,
                           SkeletonRestriction::DarcyRegion);
  sys.tri_rule = quadrature_triangle(quad_degree);
  sys.seg_rule = quadrature_segment(quad_degree);

  sys.off_u = 0;
  sys.off_p = sys.off_u + sys.velocity.n_dofs();
  sys.off_ubar = sys.off_p + sys.pressure.n_dofs();
  sys.off_ps = sys.off_ubar + sys.facet_velocity.n_dofs();
  sys.off_pd = sys.off_ps + sys.facet_pressure_s.n_dofs();
  sys.has_mean_row = (gauge == PressureGauge::ZeroMean);
  sys.n_total = sys.off_pd + sys.facet_pressure_d.n_dofs() +
                (sys.has_mean_row ? 1 : 0);
  return sys;
}

AssembledFlow assemble_flow(const FlowSystem& sys, const FlowProblem& problem) {
  const Mesh& mesh = *sys.mesh;
  const DofHelper dof{sys};
  const int n = sys.n_total;
  const int mean_row = sys.has_mean_row ? n - 1 : -1;

  if (sys.has_mean_row != (problem.gauge == PressureGauge::ZeroMean))
    throw std::invalid_argument("flow system was built for a different gauge");
  bool any_pressure_fixing = false;
  for (const FlowBC& bc : problem.bcs)
    any_pressure_fixing = any_pressure_fixing || pressure_fixing_kind(bc.kind);
  if (problem.gauge == PressureGauge::ZeroMean && any_pressure_fixing)
    throw std::invalid_argument(
        "zero-mean pressure gauge cannot be combined with stress or pressure "
        "boundary data (the boundary already sets the pressure level)");
  if (problem.gauge == PressureGauge::BoundarySet && !any_pressure_fixing)
    throw std::invalid_argument(
        "boundary-set pressure gauge needs a stress or pressure boundary "
        "condition");

  const std::vector<const FlowBC*> facet_bc =
      resolve_boundary_conditions(mesh, problem.bcs);

  // Tabulated bases at the shared rules.
  const BasisTable vel_vol = tabulate(sys.velocity.basis, sys.tri_rule);
  const BasisTable p_vol = tabulate(sys.pressure.basis, sys.tri_rule);
  const TraceTable vel_trace = build_trace_table(sys.velocity.basis, sys.seg_rule);
  const BasisTable bar_seg = tabulate(sys.facet_velocity.basis, sys.seg_rule);

  const int nbv = sys.velocity.basis.size();
  const int nbp = sys.pressure.basis.size();
  const int nbb = sys.facet_velocity.basis.size();  // = degree + 1
  const double mu = problem.mu;

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh.n_cells()) *
               static_cast<size_t>(4 * nbv * nbv + 4 * nbv * nbp + 64));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  std::vector<Vec2> grad_phys(static_cast<size_t>(nbv));

  // ---- volume contributions ------------------------------------------------
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<size_t>(c)];
    const CellMap map = cell_map(mesh, c);
    const bool stokes = cell.region == Region::Stokes;

    Eigen::MatrixXd avv = Eigen::MatrixXd::Zero(2 * nbv, 2 * nbv);
    Eigen::MatrixXd bvp = Eigen::MatrixXd::Zero(2 * nbv, nbp);
    Eigen::VectorXd rv = Eigen::VectorXd::Zero(2 * nbv);
    Eigen::VectorXd rp = Eigen::VectorXd::Zero(nbp);
    Eigen::VectorXd pmass = Eigen::VectorXd::Zero(nbp);

    for (int q = 0; q < sys.tri_rule.size(); ++q) {
      const double w = sys.tri_rule.weights[static_cast<size_t>(q)] * map.det;
      const Vec2 x = map.to_physical(sys.tri_rule.points[static_cast<size_t>(q)]);
      for (int i = 0; i < nbv; ++i)
        grad_phys[static_cast<size_t>(i)] =
            map.grad_to_physical(vel_vol.grad(q, i));

      if (stokes) {
        // (2 mu eps(u), eps(v))
        for (int i = 0; i < nbv; ++i) {
          const Vec2 gi = grad_phys[static_cast<size_t>(i)];
          for (int j = 0; j < nbv; ++j) {
            const Vec2 gj = grad_phys[static_cast<size_t>(j)];
            const double dot = gi.dot(gj);
            const double gie[2] = {gi.x, gi.y};
            const double gjd[2] = {gj.x, gj.y};
            for (int d = 0; d < 2; ++d)
              for (int e = 0; e < 2; ++e)
                avv(2 * i + d, 2 * j + e) +=
                    w * mu * ((d == e ? dot : 0.0) + gie[e] * gjd[d]);
          }
        }
        const Vec2 f = problem.body_force ? problem.body_force(x) : Vec2{};
        for (int i = 0; i < nbv; ++i) {
          rv(2 * i + 0) += w * f.x * vel_vol.value(q, i);
          rv(2 * i + 1) += w * f.y * vel_vol.value(q, i);
        }
      } else {
        // (kappa^{-1} u, v)
        const double ikap = 1.0 / problem.kappa(x, Region::Darcy);
        for (int i = 0; i < nbv; ++i)
          for (int j = 0; j < nbv; ++j) {
            const double v = w * ikap * vel_vol.value(q, i) * vel_vol.value(q, j);
            avv(2 * i + 0, 2 * j + 0) += v;
            avv(2 * i + 1, 2 * j + 1) += v;
          }
        const double fsrc = problem.mass_source ? problem.mass_source(x) : 0.0;
        for (int m = 0; m < nbp; ++m) rp(m) += w * fsrc * p_vol.value(q, m);
      }

      // -(p, div v) over every cell
      for (int i = 0; i < nbv; ++i) {
        const Vec2 gi = grad_phys[static_cast<size_t>(i)];
        for (int m = 0; m < nbp; ++m) {
          bvp(2 * i + 0, m) -= w * p_vol.value(q, m) * gi.x;
          bvp(2 * i + 1, m) -= w * p_vol.value(q, m) * gi.y;
        }
      }
      for (int m = 0; m < nbp; ++m) pmass(m) += w * p_vol.value(q, m);
    }

    for (int i = 0; i < nbv; ++i)
      for (int d = 0; d < 2; ++d) {
        const int row = dof.u(c, i, d);
        for (int j = 0; j < nbv; ++j)
          for (int e = 0; e < 2; ++e) {
            const double v = avv(2 * i + d, 2 * j + e);
            if (v != 0.0) trip.emplace_back(row, dof.u(c, j, e), v);
          }
        for (int m = 0; m < nbp; ++m) {
          const double v = bvp(2 * i + d, m);
          if (v != 0.0) {
            trip.emplace_back(row, dof.p(c, m), v);
            trip.emplace_back(dof.p(c, m), row, v);
          }
        }
        rhs(row) += rv(2 * i + d);
      }
    for (int m = 0; m < nbp; ++m) {
      rhs(dof.p(c, m)) += rp(m);
      if (mean_row >= 0) {
        trip.emplace_back(mean_row, dof.p(c, m), pmass(m));
        trip.emplace_back(dof.p(c, m), mean_row, pmass(m));
      }
    }
  }

  // ---- facet contributions, cell side by cell side -------------------------
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    const Vec2 va = mesh.vertices[static_cast<size_t>(facet.v[0])];
    const Vec2 vb = mesh.vertices[static_cast<size_t>(facet.v[1])];
    const FlowBC* bc =
        facet.kind == FacetKind::Boundary ? facet_bc[static_cast<size_t>(f)] : nullptr;

    const int nsides = facet.cell[1] >= 0 ? 2 : 1;
    for (int side = 0; side < nsides; ++side) {
      const int c = facet.cell[side];
      const Cell& cell = mesh.cells[static_cast<size_t>(c)];
      const bool stokes = cell.region == Region::Stokes;
      const int variant = trace_variant(mesh, f, side);
      const Vec2 nrm = mesh.outward_normal(f, side);
      const CellMap map = cell_map(mesh, c);

      // <pbar_region, v.n> coupling of this cell's velocity to the facet
      // pressure of its region (every facet of the cell).
      Eigen::MatrixXd bfac = Eigen::MatrixXd::Zero(2 * nbv, nbb);
      // Penalty and stress-consistency block over [cell u | facet ubar].
      const int nloc = 2 * nbv + 2 * nbb;
      Eigen::MatrixXd aloc;
      if (stokes) aloc = Eigen::MatrixXd::Zero(nloc, nloc);

      const double pen = 2.0 * sys.beta * mu / cell.diameter;

      for (int q = 0; q < sys.seg_rule.size(); ++q) {
        const double w =
            sys.seg_rule.weights[static_cast<size_t>(q)] * facet.length;
        for (int i = 0; i < nbv; ++i)
          grad_phys[static_cast<size_t>(i)] =
              map.grad_to_physical(vel_trace.grad(variant, q, i));

        for (int m = 0; m < nbb; ++m) {
          const double pm = w * bar_seg.value(q, m);
          for (int i = 0; i < nbv; ++i) {
            const double phi = vel_trace.value(variant, q, i);
            bfac(2 * i + 0, m) += pm * phi * nrm.x;
            bfac(2 * i + 1, m) += pm * phi * nrm.y;
          }
        }

        if (stokes) {
          // Penalty (2 beta mu / h)(u - ubar).(v - vbar): test/trial values
          // are +phi on the cell block and +psi on the facet block, with the
          // minus signs expanded below.
          for (int i = 0; i < nbv; ++i) {
            const double pi = vel_trace.value(variant, q, i);
            for (int j = 0; j < nbv; ++j) {
              const double pj = vel_trace.value(variant, q, j);
              const double v = w * pen * pi * pj;
              aloc(2 * i + 0, 2 * j + 0) += v;
              aloc(2 * i + 1, 2 * j + 1) += v;
            }
            for (int m = 0; m < nbb; ++m) {
              const double pm = bar_seg.value(q, m);
              const double v = w * pen * pi * pm;
              aloc(2 * i + 0, 2 * nbv + 2 * m + 0) -= v;
              aloc(2 * i + 1, 2 * nbv + 2 * m + 1) -= v;
              aloc(2 * nbv + 2 * m + 0, 2 * i + 0) -= v;
              aloc(2 * nbv + 2 * m + 1, 2 * i + 1) -= v;
            }
          }
          for (int m = 0; m < nbb; ++m) {
            const double pm = bar_seg.value(q, m);
            for (int mm = 0; mm < nbb; ++mm) {
              const double v = w * pen * pm * bar_seg.value(q, mm);
              aloc(2 * nbv + 2 * m + 0, 2 * nbv + 2 * mm + 0) += v;
              aloc(2 * nbv + 2 * m + 1, 2 * nbv + 2 * mm + 1) += v;
            }
          }

          // Stress consistency -<2 mu eps(u) n, v - vbar> plus its symmetric
          // counterpart -<2 mu eps(v) n, u - ubar>.
          for (int j = 0; j < nbv; ++j) {
            const Vec2 gj = grad_phys[static_cast<size_t>(j)];
            const double gn = gj.dot(nrm);
            const double gjc[2] = {gj.x, gj.y};
            const double nc[2] = {nrm.x, nrm.y};
            for (int e = 0; e < 2; ++e) {
              // traction of trial (j, e): t_d = mu (gn delta_de + gj_d n_e)
              double t[2];
              t[0] = mu * ((e == 0 ? gn : 0.0) + gjc[0] * nc[e]);
              t[1] = mu * ((e == 1 ? gn : 0.0) + gjc[1] * nc[e]);
              for (int i = 0; i < nbv; ++i) {
                const double phi = vel_trace.value(variant, q, i);
                for (int d = 0; d < 2; ++d) {
                  const double v = -w * t[d] * phi;
                  aloc(2 * i + d, 2 * j + e) += v;
                  aloc(2 * j + e, 2 * i + d) += v;
                }
              }
              for (int m = 0; m < nbb; ++m) {
                const double pm = bar_seg.value(q, m);
                for (int d = 0; d < 2; ++d) {
                  const double v = w * t[d] * pm;
                  aloc(2 * nbv + 2 * m + d, 2 * j + e) += v;
                  aloc(2 * j + e, 2 * nbv + 2 * m + d) += v;
                }
              }
            }
          }
        }

        if (bc != nullptr && side == 0) {
          const double s = sys.seg_rule.points[static_cast<size_t>(q)].x;
          const Vec2 x{va.x + s * (vb.x - va.x), va.y + s * (vb.y - va.y)};
          if (bc->kind == FlowBC::Kind::VelocityDirichlet) {
            // The free facet-pressure row keeps enforcing u.n = g.n weakly.
            const Vec2 g = bc->velocity(x);
            const double gn = g.dot(nrm);
            for (int m = 0; m < nbb; ++m)
              rhs(dof.ps(f, m)) += w * bar_seg.value(q, m) * gn;
          } else if (bc->kind == FlowBC::Kind::NormalFluxData) {
            const double gn = bc->scalar(x);
            for (int m = 0; m < nbb; ++m)
              rhs(dof.pd(f, m)) += w * bar_seg.value(q, m) * gn;
          }
        }
      }

      // Scatter this side's blocks.
      std::vector<int> pbar_dofs(static_cast<size_t>(nbb));
      for (int m = 0; m < nbb; ++m)
        pbar_dofs[static_cast<size_t>(m)] = stokes ? dof.ps(f, m) : dof.pd(f, m);
      for (int i = 0; i < nbv; ++i)
        for (int d = 0; d < 2; ++d) {
          const int row = dof.u(c, i, d);
          for (int m = 0; m < nbb; ++m) {
            const double v = bfac(2 * i + d, m);
            if (v != 0.0) {
              trip.emplace_back(row, pbar_dofs[static_cast<size_t>(m)], v);
              trip.emplace_back(pbar_dofs[static_cast<size_t>(m)], row, v);
            }
          }
        }
      if (stokes) {
        std::vector<int> loc(static_cast<size_t>(nloc));
        for (int i = 0; i < nbv; ++i)
          for (int d = 0; d < 2; ++d)
            loc[static_cast<size_t>(2 * i + d)] = dof.u(c, i, d);
        for (int m = 0; m < nbb; ++m)
          for (int d = 0; d < 2; ++d)
            loc[static_cast<size_t>(2 * nbv + 2 * m + d)] =
                dof.ubar(f, 2 * m + d);
        for (int a = 0; a < nloc; ++a)
          for (int b = 0; b < nloc; ++b) {
            const double v = aloc(a, b);
            if (v != 0.0)
              trip.emplace_back(loc[static_cast<size_t>(a)],
                                loc[static_cast<size_t>(b)], v);
          }
      }
    }

    // Interface-only couplings: tangential slip and the facet-pressure jump
    // against the facet velocity.
    if (facet.kind == FacetKind::Interface) {
      const Vec2 nrm = mesh.interface_normal(f);
      Eigen::MatrixXd slip = Eigen::MatrixXd::Zero(2 * nbb, 2 * nbb);
      Eigen::MatrixXd jump_s = Eigen::MatrixXd::Zero(2 * nbb, nbb);
      Eigen::MatrixXd jump_d = Eigen::MatrixXd::Zero(2 * nbb, nbb);
      for (int q = 0; q < sys.seg_rule.size(); ++q) {
        const double w =
            sys.seg_rule.weights[static_cast<size_t>(q)] * facet.length;
        const double s = sys.seg_rule.points[static_cast<size_t>(q)].x;
        const Vec2 x{va.x + s * (vb.x - va.x), va.y + s * (vb.y - va.y)};
        const double coef =
            problem.alpha / std::sqrt(problem.kappa(x, Region::Darcy));
        const double proj[2][2] = {{1.0 - nrm.x * nrm.x, -nrm.x * nrm.y},
                                   {-nrm.x * nrm.y, 1.0 - nrm.y * nrm.y}};
        for (int i = 0; i < nbb; ++i) {
          const double pi = bar_seg.value(q, i);
          for (int j = 0; j < nbb; ++j) {
            const double pj = bar_seg.value(q, j);
            for (int d = 0; d < 2; ++d)
              for (int e = 0; e < 2; ++e)
                slip(2 * i + d, 2 * j + e) += w * coef * pi * pj * proj[d][e];
          }
          for (int m = 0; m < nbb; ++m) {
            const double pm = bar_seg.value(q, m);
            jump_s(2 * i + 0, m) -= w * pi * pm * nrm.x;
            jump_s(2 * i + 1, m) -= w * pi * pm * nrm.y;
            jump_d(2 * i + 0, m) += w * pi * pm * nrm.x;
            jump_d(2 * i + 1, m) += w * pi * pm * nrm.y;
          }
        }
      }
      for (int i = 0; i < nbb; ++i)
        for (int d = 0; d < 2; ++d) {
          const int row = dof.ubar(f, 2 * i + d);
          for (int j = 0; j < nbb; ++j)
            for (int e = 0; e < 2; ++e) {
              const double v = slip(2 * i + d, 2 * j + e);
              if (v != 0.0)
                trip.emplace_back(row, dof.ubar(f, 2 * j + e), v);
            }
          for (int m = 0; m < nbb; ++m) {
            const double vs = jump_s(2 * i + d, m);
            if (vs != 0.0) {
              trip.emplace_back(row, dof.ps(f, m), vs);
              trip.emplace_back(dof.ps(f, m), row, vs);
            }
            const double vd = jump_d(2 * i + d, m);
            if (vd != 0.0) {
              trip.emplace_back(row, dof.pd(f, m), vd);
              trip.emplace_back(dof.pd(f, m), row, vd);
            }
          }
        }
    }
  }

  // ---- essential constraints ----------------------------------------------
  ConstraintSet cset(n);
  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    if (facet.kind != FacetKind::Boundary) continue;
    const FlowBC* bc = facet_bc[static_cast<size_t>(f)];
    switch (bc->kind) {
      case FlowBC::Kind::VelocityDirichlet: {
        const std::vector<Vec2> nodes =
            facet_node_positions(sys.facet_velocity, mesh, f);
        for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
          const Vec2 g = bc->velocity(nodes[static_cast<size_t>(i)]);
          cset.set(dof.ubar(f, 2 * i + 0), g.x);
          cset.set(dof.ubar(f, 2 * i + 1), g.y);
        }
        break;
      }
      case FlowBC::Kind::SlipSymmetry: {
        const Vec2 nrm = mesh.outward_normal(f, 0);
        int comp;
        if (std::abs(std::abs(nrm.x) - 1.0) < 1e-12)
          comp = 0;
        else if (std::abs(std::abs(nrm.y) - 1.0) < 1e-12)
          comp = 1;
        else
          throw std::invalid_argument(
              "slip/symmetry boundaries must be axis-aligned");
        const int nodes = sys.facet_velocity.basis.size();
        for (int i = 0; i < nodes; ++i)
          cset.set(dof.ubar(f, 2 * i + comp), 0.0);
        break;
      }
      case FlowBC::Kind::TotalStressZero: {
        for (int m = 0; m < sys.facet_pressure_s.basis.size(); ++m)
          cset.set(dof.ps(f, m), 0.0);
        break;
      }
      case FlowBC::Kind::PressureData: {
        const std::vector<Vec2> nodes =
            facet_node_positions(sys.facet_pressure_d, mesh, f);
        for (int m = 0; m < static_cast<int>(nodes.size()); ++m)
          cset.set(dof.pd(f, m), bc->scalar(nodes[static_cast<size_t>(m)]));
        break;
      }
      case FlowBC::Kind::NormalFluxData:
        break;  // purely natural
    }
  }

  // Zero-mean gauge: the problem data must be globally compatible, since
  // every boundary condition prescribes the normal velocity.  The integrals
  // are formed with a high-degree rule of their own so that the verdict
  // reflects the data, not the assembly rule's quadrature error.
  if (problem.gauge == PressureGauge::ZeroMean) {
    double source_integral = 0.0, source_abs_integral = 0.0;
    double boundary_flux = 0.0;
    const QuadratureRule tri_fine = quadrature_triangle(20);
    const QuadratureRule seg_fine = quadrature_segment(20);
    for (int c = 0; c < mesh.n_cells(); ++c) {
      if (mesh.cells[static_cast<size_t>(c)].region != Region::Darcy) continue;
      if (!problem.mass_source) break;
      const CellMap map = cell_map(mesh, c);
      for (int q = 0; q < tri_fine.size(); ++q) {
        const double w = tri_fine.weights[static_cast<size_t>(q)] * map.det;
        const double fsrc =
            problem.mass_source(map.to_physical(tri_fine.points[static_cast<size_t>(q)]));
        source_integral += w * fsrc;
        source_abs_integral += w * std::abs(fsrc);
      }
    }
    for (int f = 0; f < mesh.n_facets(); ++f) {
      const Facet& facet = mesh.facets[static_cast<size_t>(f)];
      if (facet.kind != FacetKind::Boundary) continue;
      const FlowBC* bc = facet_bc[static_cast<size_t>(f)];
      if (bc->kind != FlowBC::Kind::VelocityDirichlet &&
          bc->kind != FlowBC::Kind::NormalFluxData)
        continue;
      const Vec2 a = mesh.vertices[static_cast<size_t>(facet.v[0])];
      const Vec2 b = mesh.vertices[static_cast<size_t>(facet.v[1])];
      const Vec2 nrm = mesh.outward_normal(f, 0);
      for (int q = 0; q < seg_fine.size(); ++q) {
        const double w =
            seg_fine.weights[static_cast<size_t>(q)] * facet.length;
        const double s = seg_fine.points[static_cast<size_t>(q)].x;
        const Vec2 x{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
        boundary_flux += w * (bc->kind == FlowBC::Kind::VelocityDirichlet
                                  ? bc->velocity(x).dot(nrm)
                                  : bc->scalar(x));
      }
    }
    const double defect = boundary_flux + source_integral;
    if (std::abs(defect) > 1e-10 * std::max(1.0, source_abs_integral)) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "incompatible flow data: boundary outflow plus interior "
                    "mass source is %.3e (must vanish)",
                    defect);
      throw std::invalid_argument(msg);
    }
  }

  // ---- symmetric elimination of the essential dofs ------------------------
  std::vector<Eigen::Triplet<double>> kept;
  kept.reserve(trip.size());
  for (const Eigen::Triplet<double>& t : trip) {
    const bool rc = cset.constrained(t.row());
    const bool cc = cset.constrained(t.col());
    if (!rc && !cc) {
      kept.push_back(t);
    } else if (!rc && cc) {
      rhs(t.row()) -= t.value() * cset.value(t.col());
    }
    // rows of constrained dofs are dropped entirely
  }
  for (int i = 0; i < n; ++i)
    if (cset.constrained(i)) {
      kept.emplace_back(i, i, 1.0);
      rhs(i) = cset.value(i);
    }

  AssembledFlow out;
  out.matrix.resize(n, n);
  out.matrix.setFromTriplets(kept.begin(), kept.end());
  out.rhs = std::move(rhs);
  out.constrained_values =
      Eigen::Map<const Eigen::VectorXd>(cset.values().data(), n);
  out.constrained = std::move(cset).take_mask();
  return out;
}

FlowSolution solve_flow(const FlowSystem& sys, const FlowProblem& problem) {
  const AssembledFlow assembled = assemble_flow(sys, problem);
  Eigen::VectorXd x;
  if (!sys.has_mean_row) {
    const SparseFactor factor(assembled.matrix);
    x = factor.solve(assembled.rhs);
  } else {
    // The zero-mean gauge borders the matrix with a dense row coupling the
    // multiplier to every cell pressure, and that row's fill-in cripples
    // the sparse factorization.  Eliminate it instead of factoring it: the
    // leading block A is symmetric with the constant-pressure kernel only,
    // so the multiplier follows from the compatibility relation
    // lambda = k^T f / k^T b (k the kernel, b the coupling column), and
    // pinning one pressure dof makes A invertible for the remainder.  The
    // pinned equation still holds: the residual is orthogonal to k and
    // supported on the pinned entry alone, where k does not vanish.
    const int n = sys.n_total - 1;
    const int pin = sys.off_p;  // first cell pressure; never essential
    if (assembled.constrained[static_cast<size_t>(pin)])
      throw std::logic_error("pressure dof unexpectedly constrained");

    // Constant-pressure kernel over [p | pbar_s | pbar_d]; the bases are
    // nodal, so the constant function has unit coefficients.
    Eigen::VectorXd kernel = Eigen::VectorXd::Zero(n);
    kernel.segment(sys.off_p, sys.pressure.n_dofs()).setOnes();
    kernel.segment(sys.off_ps, sys.facet_pressure_s.n_dofs()).setOnes();
    kernel.segment(sys.off_pd, sys.facet_pressure_d.n_dofs()).setOnes();

    std::vector<Eigen::Triplet<double>> lead;
    lead.reserve(static_cast<size_t>(assembled.matrix.nonZeros()));
    Eigen::VectorXd column = Eigen::VectorXd::Zero(n);
    for (int outer = 0; outer < assembled.matrix.outerSize(); ++outer)
      for (Eigen::SparseMatrix<double>::InnerIterator it(assembled.matrix,
                                                         outer);
           it; ++it) {
        if (it.row() == n) continue;  // mirror of the stored column
        if (it.col() == n) {
          column(it.row()) = it.value();
          continue;
        }
        if (it.row() == pin || it.col() == pin) continue;
        lead.emplace_back(it.row(), it.col(), it.value());
      }
    lead.emplace_back(pin, pin, 1.0);
    Eigen::SparseMatrix<double> pinned(n, n);
    pinned.setFromTriplets(lead.begin(), lead.end());

    const Eigen::VectorXd f = assembled.rhs.head(n);
    const double mean_target = assembled.rhs(n);
    const double kernel_mass = kernel.dot(column);  // integral of one
    const double multiplier = kernel.dot(f) / kernel_mass;

    Eigen::VectorXd reduced = f - multiplier * column;
    reduced(pin) = 0.0;
    const SparseFactor factor(pinned);
    const Eigen::VectorXd y = factor.solve(reduced);
    const double shift = (mean_target - column.dot(y)) / kernel_mass;
    x.resize(sys.n_total);
    x.head(n) = y + shift * kernel;
    x(n) = multiplier;
  }

  FlowSolution sol;
  auto take = [&](int offset, int count) {
    return std::vector<double>(x.data() + offset, x.data() + offset + count);
  };
  sol.u = take(sys.off_u, sys.velocity.n_dofs());
  sol.p = take(sys.off_p, sys.pressure.n_dofs());
  sol.ubar = take(sys.off_ubar, sys.facet_velocity.n_dofs());
  sol.ps = take(sys.off_ps, sys.facet_pressure_s.n_dofs());
  sol.pd = take(sys.off_pd, sys.facet_pressure_d.n_dofs());
  if (sys.has_mean_row) sol.mean_multiplier = x(sys.n_total - 1);
  return sol;
}

FlowReport check_flow_conservation(const FlowSystem& sys,
                                   const FlowProblem& problem,
                                   const FlowSolution& sol) {
  const Mesh& mesh = *sys.mesh;
  const int k = sys.disc.degree;
  const QuadratureRule tri = quadrature_triangle(std::min(2 * k + 4, 20));
  const QuadratureRule seg = quadrature_segment(std::min(2 * k + 4, 20));
  const BasisTable vel_vol = tabulate(sys.velocity.basis, tri);
  const BasisTable p_vol = tabulate(sys.pressure.basis, tri);
  const TraceTable vel_trace = build_trace_table(sys.velocity.basis, seg);

  // Target divergence: the projection of the porous mass source onto the
  // cell pressure space, computed with the same rule the assembly used.
  const std::vector<double> proj_src = l2_project_cells(
      sys.pressure, mesh, sys.tri_rule, [&](const Vec2& x, int) {
        return problem.mass_source ? problem.mass_source(x) : 0.0;
      });

  FlowReport report;
  const int nbv = sys.velocity.basis.size();
  const int nbp = sys.pressure.basis.size();
  std::vector<Vec2> grad_phys(static_cast<size_t>(nbv));

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<size_t>(c)];
    const CellMap map = cell_map(mesh, c);
    const bool darcy = cell.region == Region::Darcy;
    const int ubase = sys.velocity.cell_offset(c);
    const int pbase = sys.pressure.cell_offset(c);
    for (int q = 0; q < tri.size(); ++q) {
      const double w = tri.weights[static_cast<size_t>(q)] * map.det;
      for (int i = 0; i < nbv; ++i)
        grad_phys[static_cast<size_t>(i)] =
            map.grad_to_physical(vel_vol.grad(q, i));
      double div_u = 0.0, ux = 0.0, uy = 0.0;
      for (int i = 0; i < nbv; ++i) {
        const double cx = sol.u[static_cast<size_t>(ubase + 2 * i + 0)];
        const double cy = sol.u[static_cast<size_t>(ubase + 2 * i + 1)];
        div_u += cx * grad_phys[static_cast<size_t>(i)].x +
                 cy * grad_phys[static_cast<size_t>(i)].y;
        ux += cx * vel_vol.value(q, i);
        uy += cy * vel_vol.value(q, i);
      }
      double target = 0.0;
      if (darcy)
        for (int m = 0; m < nbp; ++m)
          target += proj_src[static_cast<size_t>(pbase + m)] * p_vol.value(q, m);
      report.divergence_l2 += w * (div_u + target) * (div_u + target);
      report.velocity_l2 += w * (ux * ux + uy * uy);
    }
  }

  for (int f = 0; f < mesh.n_facets(); ++f) {
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    if (facet.kind == FacetKind::Boundary) continue;
    const Vec2 nrm = mesh.outward_normal(f, 0);
    const int v0 = trace_variant(mesh, f, 0);
    const int v1 = trace_variant(mesh, f, 1);
    const int b0 = sys.velocity.cell_offset(facet.cell[0]);
    const int b1 = sys.velocity.cell_offset(facet.cell[1]);

    int stokes_side = -1;
    if (facet.kind == FacetKind::Interface)
      stokes_side =
          mesh.cells[static_cast<size_t>(facet.cell[0])].region == Region::Stokes
              ? 0
              : 1;

    for (int q = 0; q < seg.size(); ++q) {
      const double w = seg.weights[static_cast<size_t>(q)] * facet.length;
      Vec2 u0, u1;
      for (int i = 0; i < nbv; ++i) {
        u0.x += sol.u[static_cast<size_t>(b0 + 2 * i + 0)] * vel_trace.value(v0, q, i);
        u0.y += sol.u[static_cast<size_t>(b0 + 2 * i + 1)] * vel_trace.value(v0, q, i);
        u1.x += sol.u[static_cast<size_t>(b1 + 2 * i + 0)] * vel_trace.value(v1, q, i);
        u1.y += sol.u[static_cast<size_t>(b1 + 2 * i + 1)] * vel_trace.value(v1, q, i);
      }
      const double jump = (u0 - u1).dot(nrm);
      report.jump_l2 += w * jump * jump;

      if (stokes_side >= 0) {
        const double s = seg.points[static_cast<size_t>(q)].x;
        const Vec2 us = stokes_side == 0 ? u0 : u1;
        const Vec2 ub{eval_facet(sys.facet_velocity, sol.ubar, f, s, 0),
                      eval_facet(sys.facet_velocity, sol.ubar, f, s, 1)};
        const double diff = (us - ub).dot(nrm);
        report.interface_trace_l2 += w * diff * diff;
      }
    }
  }

  report.divergence_l2 = std::sqrt(report.divergence_l2);
  report.jump_l2 = std::sqrt(report.jump_l2);
  report.interface_trace_l2 = std::sqrt(report.interface_trace_l2);
  report.velocity_l2 = std::sqrt(report.velocity_l2);
  return report;
}

}  // namespace sdt
