/// @file mesh.hpp
/// @brief Structured two-region triangulations of the unit square with full
///        facet connectivity, region tags, and boundary labels.
///
/// The domain is [0,1]^2 split by a horizontal line into a free-flow region
/// (top) and a porous region (bottom).  Meshes are deterministic structured
/// triangulations so that element counts, facet counts, and refinement
/// ladders are exactly reproducible.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace sdt {

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}
  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Region tag: free flow (Stokes) above the split line, porous (Darcy) below.
enum class Region : std::uint8_t { Stokes = 0, Darcy = 1 };

enum class FacetKind : std::uint8_t { Interior, Interface, Boundary };

/// Boundary labels for the unit-square domains.  The fine-grained labels
/// partition the outer boundary; StokesAll/DarcyAll are coarse aliases used
/// when one condition covers a whole region boundary.
enum class BoundaryLabel : std::uint8_t {
  None = 0,
  StokesLeft,    // x = 0, y > split (inflow side in the contaminant demo)
  StokesRight,   // x = 1, y > split
  StokesTop,     // y = 1
  DarcySide,     // x = 0 or x = 1, y < split
  DarcyBottom,   // y = 0
  StokesAll,     // any outer facet of the free-flow region (query alias)
  DarcyAll,      // any outer facet of the porous region (query alias)
};

std::string to_string(BoundaryLabel label);

struct Cell {
  std::array<int, 3> v{};       // vertex indices, counterclockwise
  std::array<int, 3> facet{};   // facet ids; local edge e joins v[e], v[(e+1)%3]
  Region region = Region::Stokes;
  double area = 0.0;
  double diameter = 0.0;        // longest edge, the h_K of penalty scalings
};

struct Facet {
  std::array<int, 2> v{-1, -1};          // endpoint vertices, v[0] < v[1]
  std::array<int, 2> cell{-1, -1};       // incident cells; cell[1] = -1 on boundary
  std::array<int, 2> local_edge{-1, -1}; // local edge index within each cell
  FacetKind kind = FacetKind::Interior;
  BoundaryLabel label = BoundaryLabel::None;
  Vec2 normal;      // unit normal pointing out of cell[0]
  double length = 0.0;
};

/// Parameters for the structured unit-square builder.
enum class DiagonalPattern : std::uint8_t { Right, Crossed };

struct MeshParams {
  int nx = 1;
  int ny = 2;
  double split_y = 0.5;
  DiagonalPattern pattern = DiagonalPattern::Right;
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<Facet> facets;
  double split_y = 0.5;

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_facets() const { return static_cast<int>(facets.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }

  /// Side (0 or 1) of facet f occupied by cell c; -1 if not incident.
  int facet_side(int f, int c) const;

  /// Outward unit normal of facet f as seen from the cell on the given side.
  Vec2 outward_normal(int f, int side) const;

  /// Unit normal on an interface facet oriented from the Stokes region into
  /// the Darcy region (the convention used by all interface terms).
  Vec2 interface_normal(int f) const;

  /// True if the facet belongs to the skeleton of the given region (facets of
  /// that region's cells; interface facets belong to both skeletons).
  bool facet_in_region_skeleton(int f, Region r) const;

  /// True if the boundary facet carries the given label; coarse aliases
  /// StokesAll/DarcyAll match any outer facet of the respective region.
  bool boundary_matches(int f, BoundaryLabel query) const;
};

/// Build a structured triangulation of [0,1]^2 with the interface at
/// y = split_y.  Right pattern: 2 triangles per grid square; Crossed:
/// 4 triangles around the square's center.  Throws std::invalid_argument if
/// ny*split_y is not an integer row count (the interface must coincide with
/// a mesh line).
Mesh build_structured_mesh(const MeshParams& params);

/// Populate facet kinds and boundary labels from cell incidence and
/// coordinate predicates.  Called by build_structured_mesh; exposed for
/// rebuilding classifications after manual edits in tests.
void classify_facets(Mesh& mesh);

/// Largest cell diameter.
double mesh_size(const Mesh& mesh);

}  // namespace sdt
