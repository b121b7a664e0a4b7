#pragma once
/// @file fespace.hpp
/// @brief Broken (cellwise) and skeleton finite-element spaces on two-region
///        simplicial meshes, plus quadrature tables and L2 projections.
///
/// Cell spaces are fully discontinuous Lagrange spaces, one block of
/// coefficients per cell.  Skeleton spaces live on mesh facets and come in a
/// continuous flavour (shared vertex dofs plus per-facet interior dofs) and a
/// discontinuous flavour (one independent block per facet).  All facet
/// integrals are parametrized by the facet's canonical vertex order
/// x(s) = v0 + s (v1 - v0), so both adjacent cells and the skeleton unknowns
/// always agree on the parametrization without orientation flips.

#include "sdt/basis.hpp"
#include "sdt/mesh.hpp"
#include "sdt/quadrature.hpp"

#include <array>
#include <functional>
#include <vector>

namespace sdt {

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Affine map from the reference triangle {x >= 0, y >= 0, x + y <= 1}.
struct CellMap {
  Vec2 v0;           ///< image of the reference origin
  double j[2][2];    ///< Jacobian; columns are the edge vectors v1-v0, v2-v0
  double inv[2][2];  ///< inverse Jacobian
  double det = 0.0;  ///< Jacobian determinant (= twice the cell area)

  Vec2 to_physical(const Vec2& ref) const {
    return {v0.x + j[0][0] * ref.x + j[0][1] * ref.y,
            v0.y + j[1][0] * ref.x + j[1][1] * ref.y};
  }
  Vec2 to_reference(const Vec2& phys) const {
    const double dx = phys.x - v0.x;
    const double dy = phys.y - v0.y;
    return {inv[0][0] * dx + inv[0][1] * dy, inv[1][0] * dx + inv[1][1] * dy};
  }
  /// Push a reference gradient forward: returns J^{-T} g.
  Vec2 grad_to_physical(const Vec2& g) const {
    return {inv[0][0] * g.x + inv[1][0] * g.y,
            inv[0][1] * g.x + inv[1][1] * g.y};
  }
};

CellMap cell_map(const Mesh& mesh, int c);

// ---------------------------------------------------------------------------
// Spaces
// ---------------------------------------------------------------------------

/// Discontinuous Lagrange space of the given polynomial degree on every cell.
/// Vector-valued spaces (rank 2) interleave components: the local dof of
/// scalar basis function i, component d is rank*i + d.
struct CellSpace {
  int degree = 0;
  int rank = 1;
  int n_cells = 0;
  ReferenceBasis basis;

  int ndof_per_cell() const { return rank * basis.size(); }
  int n_dofs() const { return n_cells * ndof_per_cell(); }
  int cell_offset(int c) const { return c * ndof_per_cell(); }
  int local_dof(int scalar_index, int comp) const {
    return rank * scalar_index + comp;
  }
};

CellSpace build_cell_space(const Mesh& mesh, int degree, int rank);

enum class Continuity { Continuous, Discontinuous };

/// Which facets carry skeleton unknowns.
enum class SkeletonRestriction {
  All,           ///< every facet of the mesh
  StokesRegion,  ///< facets incident to at least one Stokes cell
  DarcyRegion,   ///< facets incident to at least one Darcy cell
};

/// Piecewise-polynomial space on (a subset of) the mesh skeleton.
///
/// Scalar dofs are laid out facet-node-wise; vector spaces interleave the
/// components, so the global dof of scalar dof s, component d is rank*s + d.
/// On each active facet the local dofs follow the segment basis nodes in
/// ascending parameter order (node 0 at the canonical first vertex).
struct SkeletonSpace {
  int degree = 0;
  int rank = 1;
  Continuity continuity = Continuity::Discontinuous;
  SkeletonRestriction restriction = SkeletonRestriction::All;
  ReferenceBasis basis;  ///< segment basis of the given degree

  std::vector<char> active;       ///< per facet: carries unknowns?
  std::vector<int> vertex_base;   ///< continuous only: scalar dof of vertex, -1 if none
  std::vector<int> facet_base;    ///< base scalar dof of the facet's own block, -1 if inactive
  std::vector<std::vector<int>> dof_table;  ///< per facet: global dofs, node-major, components interleaved
  int n_scalar = 0;

  int n_dofs() const { return rank * n_scalar; }
  int ndof_per_facet() const { return rank * (degree + 1); }
  bool is_active(int f) const { return active[static_cast<size_t>(f)] != 0; }
  /// Global dofs on facet f (empty if the facet carries none).
  const std::vector<int>& facet_dofs(int f) const {
    return dof_table[static_cast<size_t>(f)];
  }
};

SkeletonSpace build_skeleton_space(const Mesh& mesh, int degree, int rank,
                                   Continuity continuity,
                                   SkeletonRestriction restriction);

/// Physical positions of the segment-basis nodes on facet f, in local node
/// order (ascending parameter from the canonical first vertex).
std::vector<Vec2> facet_node_positions(const SkeletonSpace& space,
                                       const Mesh& mesh, int f);

// ---------------------------------------------------------------------------
// Tabulated bases
// ---------------------------------------------------------------------------

/// Basis values and reference gradients at the points of a quadrature rule.
struct BasisTable {
  int nbasis = 0;
  int nq = 0;
  std::vector<double> values;  ///< values[q * nbasis + i]
  std::vector<Vec2> grads;     ///< reference gradients, same layout

  double value(int q, int i) const {
    return values[static_cast<size_t>(q * nbasis + i)];
  }
  const Vec2& grad(int q, int i) const {
    return grads[static_cast<size_t>(q * nbasis + i)];
  }
};

BasisTable tabulate(const ReferenceBasis& basis, const QuadratureRule& rule);

/// Traces of a triangle basis along the cell edges, tabulated at segment
/// quadrature points for each of the six oriented edge pullbacks.  The
/// variant index encodes (local edge e, orientation): variant = 2e + flip,
/// where flip = 1 means the facet's canonical first vertex is the edge's
/// *second* local vertex.
struct TraceTable {
  int nbasis = 0;
  int nq = 0;
  std::array<std::vector<double>, 6> values;
  std::array<std::vector<Vec2>, 6> grads;  ///< reference gradients

  double value(int variant, int q, int i) const {
    return values[static_cast<size_t>(variant)]
                 [static_cast<size_t>(q * nbasis + i)];
  }
  const Vec2& grad(int variant, int q, int i) const {
    return grads[static_cast<size_t>(variant)]
                [static_cast<size_t>(q * nbasis + i)];
  }
};

TraceTable build_trace_table(const ReferenceBasis& tri_basis,
                             const QuadratureRule& segment_rule);

/// Pullback variant to use when integrating over facet f from the given side.
int trace_variant(const Mesh& mesh, int f, int side);

/// Reference-triangle point of facet parameter s under the given variant.
Vec2 trace_ref_point(int variant, double s);

// ---------------------------------------------------------------------------
// Projections and evaluation
// ---------------------------------------------------------------------------

/// Componentwise scalar field: f(x, comp) with comp in [0, rank).
using FieldFn = std::function<double(const Vec2&, int)>;

/// Cellwise L2 projection; the rule must integrate degree 2*degree exactly
/// for the projection to be the true L2 projection.
std::vector<double> l2_project_cells(const CellSpace& space, const Mesh& mesh,
                                     const QuadratureRule& tri_rule,
                                     const FieldFn& f);

/// Facetwise (discontinuous) or globally coupled (continuous) L2 projection
/// onto a skeleton space.
std::vector<double> l2_project_skeleton(const SkeletonSpace& space,
                                        const Mesh& mesh,
                                        const QuadratureRule& segment_rule,
                                        const FieldFn& f);

/// Value of a cell-space field at a reference point of cell c.
double eval_cell(const CellSpace& space, const std::vector<double>& coeff,
                 int c, const Vec2& ref, int comp = 0);

/// Physical gradient of a cell-space field at a reference point of cell c.
Vec2 eval_cell_grad(const CellSpace& space, const Mesh& mesh,
                    const std::vector<double>& coeff, int c, const Vec2& ref,
                    int comp = 0);

/// Value of a skeleton field at facet parameter s in [0, 1].
double eval_facet(const SkeletonSpace& space, const std::vector<double>& coeff,
                  int f, double s, int comp = 0);

}  // namespace sdt
