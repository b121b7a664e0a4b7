/// @file fespace.cpp
/// @brief Cell and skeleton space construction, basis tabulation, projections.

#include "sdt/fespace.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>

namespace sdt {

namespace {

const Vec2 kRefVertex[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};

bool facet_active(const Mesh& mesh, int f, SkeletonRestriction restriction) {
  switch (restriction) {
    case SkeletonRestriction::All:
      return true;
    case SkeletonRestriction::StokesRegion:
      return mesh.facet_in_region_skeleton(f, Region::Stokes);
    case SkeletonRestriction::DarcyRegion:
      return mesh.facet_in_region_skeleton(f, Region::Darcy);
  }
  return false;
}

}  // namespace

CellMap cell_map(const Mesh& mesh, int c) {
  const Cell& cell = mesh.cells[static_cast<size_t>(c)];
  const Vec2 a = mesh.vertices[static_cast<size_t>(cell.v[0])];
  const Vec2 b = mesh.vertices[static_cast<size_t>(cell.v[1])];
  const Vec2 d = mesh.vertices[static_cast<size_t>(cell.v[2])];
  CellMap map;
  map.v0 = a;
  map.j[0][0] = b.x - a.x;
  map.j[0][1] = d.x - a.x;
  map.j[1][0] = b.y - a.y;
  map.j[1][1] = d.y - a.y;
  map.det = map.j[0][0] * map.j[1][1] - map.j[0][1] * map.j[1][0];
  const double inv_det = 1.0 / map.det;
  map.inv[0][0] = map.j[1][1] * inv_det;
  map.inv[0][1] = -map.j[0][1] * inv_det;
  map.inv[1][0] = -map.j[1][0] * inv_det;
  map.inv[1][1] = map.j[0][0] * inv_det;
  return map;
}

CellSpace build_cell_space(const Mesh& mesh, int degree, int rank) {
  if (rank < 1 || rank > 2)
    throw std::invalid_argument("cell space rank must be 1 or 2");
  CellSpace space;
  space.degree = degree;
  space.rank = rank;
  space.n_cells = mesh.n_cells();
  space.basis = triangle_basis(degree);
  return space;
}

SkeletonSpace build_skeleton_space(const Mesh& mesh, int degree, int rank,
                                   Continuity continuity,
                                   SkeletonRestriction restriction) {
  if (rank < 1 || rank > 2)
    throw std::invalid_argument("skeleton space rank must be 1 or 2");
  if (continuity == Continuity::Continuous && degree < 1)
    throw std::invalid_argument(
        "continuous skeleton spaces need degree >= 1 (vertex nodes)");

  SkeletonSpace space;
  space.degree = degree;
  space.rank = rank;
  space.continuity = continuity;
  space.restriction = restriction;
  space.basis = segment_basis(degree);

  const int nf = mesh.n_facets();
  space.active.assign(static_cast<size_t>(nf), 0);
  space.facet_base.assign(static_cast<size_t>(nf), -1);
  space.dof_table.assign(static_cast<size_t>(nf), {});
  for (int f = 0; f < nf; ++f)
    space.active[static_cast<size_t>(f)] =
        facet_active(mesh, f, restriction) ? 1 : 0;

  if (continuity == Continuity::Discontinuous) {
    int next = 0;
    for (int f = 0; f < nf; ++f) {
      if (!space.is_active(f)) continue;
      space.facet_base[static_cast<size_t>(f)] = next;
      next += degree + 1;
    }
    space.n_scalar = next;
    for (int f = 0; f < nf; ++f) {
      if (!space.is_active(f)) continue;
      std::vector<int>& dofs = space.dof_table[static_cast<size_t>(f)];
      dofs.resize(static_cast<size_t>(space.ndof_per_facet()));
      const int base = space.facet_base[static_cast<size_t>(f)];
      for (int i = 0; i <= degree; ++i)
        for (int d = 0; d < rank; ++d)
          dofs[static_cast<size_t>(rank * i + d)] = rank * (base + i) + d;
    }
    return space;
  }

  // Continuous: vertex dofs shared by all incident active facets, then
  // per-facet interior dofs.
  space.vertex_base.assign(static_cast<size_t>(mesh.n_vertices()), -1);
  int next = 0;
  for (int f = 0; f < nf; ++f) {
    if (!space.is_active(f)) continue;
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    for (int v : facet.v) {
      int& base = space.vertex_base[static_cast<size_t>(v)];
      if (base < 0) base = next++;
    }
  }
  for (int f = 0; f < nf; ++f) {
    if (!space.is_active(f)) continue;
    space.facet_base[static_cast<size_t>(f)] = next;
    next += degree - 1;
  }
  space.n_scalar = next;

  for (int f = 0; f < nf; ++f) {
    if (!space.is_active(f)) continue;
    const Facet& facet = mesh.facets[static_cast<size_t>(f)];
    std::vector<int>& dofs = space.dof_table[static_cast<size_t>(f)];
    dofs.resize(static_cast<size_t>(space.ndof_per_facet()));
    for (int i = 0; i <= degree; ++i) {
      int scalar;
      if (i == 0)
        scalar = space.vertex_base[static_cast<size_t>(facet.v[0])];
      else if (i == degree)
        scalar = space.vertex_base[static_cast<size_t>(facet.v[1])];
      else
        scalar = space.facet_base[static_cast<size_t>(f)] + (i - 1);
      for (int d = 0; d < rank; ++d)
        dofs[static_cast<size_t>(rank * i + d)] = rank * scalar + d;
    }
  }
  return space;
}

std::vector<Vec2> facet_node_positions(const SkeletonSpace& space,
                                       const Mesh& mesh, int f) {
  const Facet& facet = mesh.facets[static_cast<size_t>(f)];
  const Vec2 a = mesh.vertices[static_cast<size_t>(facet.v[0])];
  const Vec2 b = mesh.vertices[static_cast<size_t>(facet.v[1])];
  std::vector<Vec2> pts;
  pts.reserve(space.basis.nodes.size());
  for (const Vec2& node : space.basis.nodes) {
    const double s = node.x;
    pts.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
  }
  return pts;
}

BasisTable tabulate(const ReferenceBasis& basis, const QuadratureRule& rule) {
  if (basis.dim != rule.dim)
    throw std::logic_error("basis/rule dimension mismatch in tabulate");
  BasisTable table;
  table.nbasis = basis.size();
  table.nq = rule.size();
  table.values.resize(static_cast<size_t>(table.nbasis * table.nq));
  table.grads.resize(static_cast<size_t>(table.nbasis * table.nq));
  std::vector<double> values;
  std::vector<Vec2> grads;
  for (int q = 0; q < table.nq; ++q) {
    basis.eval(rule.points[static_cast<size_t>(q)], values);
    basis.eval_grad(rule.points[static_cast<size_t>(q)], grads);
    for (int i = 0; i < table.nbasis; ++i) {
      table.values[static_cast<size_t>(q * table.nbasis + i)] =
          values[static_cast<size_t>(i)];
      table.grads[static_cast<size_t>(q * table.nbasis + i)] =
          grads[static_cast<size_t>(i)];
    }
  }
  return table;
}

Vec2 trace_ref_point(int variant, double s) {
  const int edge = variant / 2;
  const bool flip = (variant % 2) != 0;
  Vec2 a = kRefVertex[edge];
  Vec2 b = kRefVertex[(edge + 1) % 3];
  if (flip) std::swap(a, b);
  return {a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
}

TraceTable build_trace_table(const ReferenceBasis& tri_basis,
                             const QuadratureRule& segment_rule) {
  if (tri_basis.dim != 2 || segment_rule.dim != 1)
    throw std::logic_error("trace table needs a triangle basis and segment rule");
  TraceTable table;
  table.nbasis = tri_basis.size();
  table.nq = segment_rule.size();
  std::vector<double> values;
  std::vector<Vec2> grads;
  for (int variant = 0; variant < 6; ++variant) {
    auto& val = table.values[static_cast<size_t>(variant)];
    auto& grd = table.grads[static_cast<size_t>(variant)];
    val.resize(static_cast<size_t>(table.nbasis * table.nq));
    grd.resize(static_cast<size_t>(table.nbasis * table.nq));
    for (int q = 0; q < table.nq; ++q) {
      const Vec2 ref =
          trace_ref_point(variant, segment_rule.points[static_cast<size_t>(q)].x);
      tri_basis.eval(ref, values);
      tri_basis.eval_grad(ref, grads);
      for (int i = 0; i < table.nbasis; ++i) {
        val[static_cast<size_t>(q * table.nbasis + i)] =
            values[static_cast<size_t>(i)];
        grd[static_cast<size_t>(q * table.nbasis + i)] =
            grads[static_cast<size_t>(i)];
      }
    }
  }
  return table;
}

int trace_variant(const Mesh& mesh, int f, int side) {
  const Facet& facet = mesh.facets[static_cast<size_t>(f)];
  const int c = facet.cell[side];
  if (c < 0) throw std::logic_error("trace_variant: no cell on that side");
  const Cell& cell = mesh.cells[static_cast<size_t>(c)];
  const int le = facet.local_edge[side];
  const int a = cell.v[le];
  const int b = cell.v[(le + 1) % 3];
  if (facet.v[0] == a && facet.v[1] == b) return 2 * le;
  if (facet.v[0] == b && facet.v[1] == a) return 2 * le + 1;
  throw std::logic_error("trace_variant: facet/cell vertex mismatch");
}

std::vector<double> l2_project_cells(const CellSpace& space, const Mesh& mesh,
                                     const QuadratureRule& tri_rule,
                                     const FieldFn& f) {
  const int nb = space.basis.size();
  const BasisTable table = tabulate(space.basis, tri_rule);

  // The affine Jacobian cancels between the mass matrix and the load vector,
  // so one reference factorization serves every cell.
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nb, nb);
  for (int q = 0; q < table.nq; ++q) {
    const double w = tri_rule.weights[static_cast<size_t>(q)];
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j)
        mass(i, j) += w * table.value(q, i) * table.value(q, j);
  }
  const Eigen::LDLT<Eigen::MatrixXd> factor(mass);

  std::vector<double> coeff(static_cast<size_t>(space.n_dofs()), 0.0);
  Eigen::MatrixXd rhs(nb, space.rank);
  for (int c = 0; c < space.n_cells; ++c) {
    const CellMap map = cell_map(mesh, c);
    rhs.setZero();
    for (int q = 0; q < table.nq; ++q) {
      const double w = tri_rule.weights[static_cast<size_t>(q)];
      const Vec2 x = map.to_physical(tri_rule.points[static_cast<size_t>(q)]);
      for (int d = 0; d < space.rank; ++d) {
        const double fv = f(x, d);
        for (int i = 0; i < nb; ++i) rhs(i, d) += w * fv * table.value(q, i);
      }
    }
    const Eigen::MatrixXd sol = factor.solve(rhs);
    const int base = space.cell_offset(c);
    for (int i = 0; i < nb; ++i)
      for (int d = 0; d < space.rank; ++d)
        coeff[static_cast<size_t>(base + space.local_dof(i, d))] = sol(i, d);
  }
  return coeff;
}

std::vector<double> l2_project_skeleton(const SkeletonSpace& space,
                                        const Mesh& mesh,
                                        const QuadratureRule& segment_rule,
                                        const FieldFn& f) {
  const int n = space.n_dofs();
  if (n == 0) return {};
  const int nb = space.basis.size();
  const BasisTable table = tabulate(space.basis, segment_rule);

  std::vector<Eigen::Triplet<double>> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int fct = 0; fct < mesh.n_facets(); ++fct) {
    if (!space.is_active(fct)) continue;
    const Facet& facet = mesh.facets[static_cast<size_t>(fct)];
    const Vec2 a = mesh.vertices[static_cast<size_t>(facet.v[0])];
    const Vec2 b = mesh.vertices[static_cast<size_t>(facet.v[1])];
    const std::vector<int>& dofs = space.facet_dofs(fct);
    for (int q = 0; q < table.nq; ++q) {
      const double w =
          segment_rule.weights[static_cast<size_t>(q)] * facet.length;
      const double s = segment_rule.points[static_cast<size_t>(q)].x;
      const Vec2 x{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
      for (int d = 0; d < space.rank; ++d) {
        const double fv = f(x, d);
        for (int i = 0; i < nb; ++i) {
          const int row = dofs[static_cast<size_t>(space.rank * i + d)];
          rhs(row) += w * fv * table.value(q, i);
          for (int j = 0; j < nb; ++j) {
            const int col = dofs[static_cast<size_t>(space.rank * j + d)];
            triplets.emplace_back(row, col,
                                  w * table.value(q, i) * table.value(q, j));
          }
        }
      }
    }
  }

  Eigen::SparseMatrix<double> mass(n, n);
  mass.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(mass);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("skeleton mass matrix factorization failed");
  const Eigen::VectorXd sol = solver.solve(rhs);
  return std::vector<double>(sol.data(), sol.data() + n);
}

double eval_cell(const CellSpace& space, const std::vector<double>& coeff,
                 int c, const Vec2& ref, int comp) {
  std::vector<double> values;
  space.basis.eval(ref, values);
  const int base = space.cell_offset(c);
  double sum = 0.0;
  for (int i = 0; i < space.basis.size(); ++i)
    sum += coeff[static_cast<size_t>(base + space.local_dof(i, comp))] *
           values[static_cast<size_t>(i)];
  return sum;
}

Vec2 eval_cell_grad(const CellSpace& space, const Mesh& mesh,
                    const std::vector<double>& coeff, int c, const Vec2& ref,
                    int comp) {
  std::vector<Vec2> grads;
  space.basis.eval_grad(ref, grads);
  const CellMap map = cell_map(mesh, c);
  const int base = space.cell_offset(c);
  Vec2 sum;
  for (int i = 0; i < space.basis.size(); ++i) {
    const Vec2 g = map.grad_to_physical(grads[static_cast<size_t>(i)]);
    const double ci =
        coeff[static_cast<size_t>(base + space.local_dof(i, comp))];
    sum.x += ci * g.x;
    sum.y += ci * g.y;
  }
  return sum;
}

double eval_facet(const SkeletonSpace& space, const std::vector<double>& coeff,
                  int f, double s, int comp) {
  if (!space.is_active(f))
    throw std::logic_error("eval_facet: facet carries no unknowns");
  std::vector<double> values;
  space.basis.eval({s, 0.0}, values);
  const std::vector<int>& dofs = space.facet_dofs(f);
  double sum = 0.0;
  for (int i = 0; i < space.basis.size(); ++i)
    sum += coeff[static_cast<size_t>(dofs[static_cast<size_t>(
               space.rank * i + comp)])] *
           values[static_cast<size_t>(i)];
  return sum;
}

}  // namespace sdt
