/// @file mesh.cpp
/// @brief Structured mesh construction, facet classification, and queries.

#include "sdt/mesh.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace sdt {

namespace {
constexpr double kCoordTol = 1e-12;  // coordinate predicate tolerance
}

double Vec2::norm() const { return std::hypot(x, y); }

std::string to_string(BoundaryLabel label) {
  switch (label) {
    case BoundaryLabel::None: return "none";
    case BoundaryLabel::StokesLeft: return "stokes-left";
    case BoundaryLabel::StokesRight: return "stokes-right";
    case BoundaryLabel::StokesTop: return "stokes-top";
    case BoundaryLabel::DarcySide: return "darcy-side";
    case BoundaryLabel::DarcyBottom: return "darcy-bottom";
    case BoundaryLabel::StokesAll: return "stokes-boundary";
    case BoundaryLabel::DarcyAll: return "darcy-boundary";
  }
  return "unknown";
}

int Mesh::facet_side(int f, int c) const {
  const Facet& fa = facets[static_cast<size_t>(f)];
  if (fa.cell[0] == c) return 0;
  if (fa.cell[1] == c) return 1;
  return -1;
}

Vec2 Mesh::outward_normal(int f, int side) const {
  const Facet& fa = facets[static_cast<size_t>(f)];
  return side == 0 ? fa.normal : Vec2{-fa.normal.x, -fa.normal.y};
}

Vec2 Mesh::interface_normal(int f) const {
  const Facet& fa = facets[static_cast<size_t>(f)];
  if (fa.kind != FacetKind::Interface)
    throw std::logic_error("interface_normal: facet is not on the interface");
  const Region r0 = cells[static_cast<size_t>(fa.cell[0])].region;
  return r0 == Region::Stokes ? fa.normal : Vec2{-fa.normal.x, -fa.normal.y};
}

bool Mesh::facet_in_region_skeleton(int f, Region r) const {
  const Facet& fa = facets[static_cast<size_t>(f)];
  for (int side = 0; side < 2; ++side) {
    if (fa.cell[side] >= 0 &&
        cells[static_cast<size_t>(fa.cell[side])].region == r)
      return true;
  }
  return false;
}

bool Mesh::boundary_matches(int f, BoundaryLabel query) const {
  const Facet& fa = facets[static_cast<size_t>(f)];
  if (fa.kind != FacetKind::Boundary) return false;
  if (query == fa.label) return true;
  if (query == BoundaryLabel::StokesAll)
    return fa.label == BoundaryLabel::StokesLeft ||
           fa.label == BoundaryLabel::StokesRight ||
           fa.label == BoundaryLabel::StokesTop;
  if (query == BoundaryLabel::DarcyAll)
    return fa.label == BoundaryLabel::DarcySide ||
           fa.label == BoundaryLabel::DarcyBottom;
  return false;
}

namespace {

void add_cell(Mesh& mesh, int a, int b, int c, Region region) {
  Cell cell;
  cell.v = {a, b, c};
  const Vec2& pa = mesh.vertices[static_cast<size_t>(a)];
  const Vec2& pb = mesh.vertices[static_cast<size_t>(b)];
  const Vec2& pc = mesh.vertices[static_cast<size_t>(c)];
  const double cross =
      (pb.x - pa.x) * (pc.y - pa.y) - (pb.y - pa.y) * (pc.x - pa.x);
  if (cross <= 0.0)
    throw std::logic_error("add_cell: vertices not counterclockwise");
  cell.area = 0.5 * cross;
  const double e0 = (pb - pa).norm();
  const double e1 = (pc - pb).norm();
  const double e2 = (pa - pc).norm();
  cell.diameter = std::max({e0, e1, e2});
  cell.region = region;
  mesh.cells.push_back(cell);
}

void build_facets(Mesh& mesh) {
  std::map<std::pair<int, int>, int> facet_of_edge;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Cell& cell = mesh.cells[static_cast<size_t>(c)];
    for (int e = 0; e < 3; ++e) {
      const int a = cell.v[static_cast<size_t>(e)];
      const int b = cell.v[static_cast<size_t>((e + 1) % 3)];
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = facet_of_edge.find(key);
      if (it == facet_of_edge.end()) {
        Facet fa;
        fa.v = {key.first, key.second};
        fa.cell[0] = c;
        fa.local_edge[0] = e;
        const Vec2 t = mesh.vertices[static_cast<size_t>(b)] -
                       mesh.vertices[static_cast<size_t>(a)];
        fa.length = t.norm();
        // outward normal of a counterclockwise cell on the edge a->b
        fa.normal = Vec2{t.y / fa.length, -t.x / fa.length};
        const int id = mesh.n_facets();
        mesh.facets.push_back(fa);
        facet_of_edge.emplace(key, id);
        cell.facet[static_cast<size_t>(e)] = id;
      } else {
        Facet& fa = mesh.facets[static_cast<size_t>(it->second)];
        if (fa.cell[1] >= 0)
          throw std::runtime_error(
              "build_facets: malformed mesh, edge shared by >2 cells");
        fa.cell[1] = c;
        fa.local_edge[1] = e;
        cell.facet[static_cast<size_t>(e)] = it->second;
      }
    }
  }
}

}  // namespace

void classify_facets(Mesh& mesh) {
  const double split = mesh.split_y;
  for (Facet& fa : mesh.facets) {
    if (fa.cell[0] < 0)
      throw std::runtime_error("classify_facets: facet with no incident cell");
    if (fa.cell[1] >= 0) {
      const Region r0 = mesh.cells[static_cast<size_t>(fa.cell[0])].region;
      const Region r1 = mesh.cells[static_cast<size_t>(fa.cell[1])].region;
      fa.kind = (r0 == r1) ? FacetKind::Interior : FacetKind::Interface;
      fa.label = BoundaryLabel::None;
      continue;
    }
    fa.kind = FacetKind::Boundary;
    const Vec2& p0 = mesh.vertices[static_cast<size_t>(fa.v[0])];
    const Vec2& p1 = mesh.vertices[static_cast<size_t>(fa.v[1])];
    const Region r = mesh.cells[static_cast<size_t>(fa.cell[0])].region;
    const bool stokes = (r == Region::Stokes);
    auto on = [&](double c0, double c1, double value) {
      return std::abs(c0 - value) <= kCoordTol && std::abs(c1 - value) <= kCoordTol;
    };
    if (on(p0.y, p1.y, 0.0)) {
      fa.label = BoundaryLabel::DarcyBottom;
    } else if (on(p0.y, p1.y, 1.0)) {
      fa.label = BoundaryLabel::StokesTop;
    } else if (on(p0.x, p1.x, 0.0) || on(p0.x, p1.x, 1.0)) {
      fa.label = stokes ? (on(p0.x, p1.x, 0.0) ? BoundaryLabel::StokesLeft
                                               : BoundaryLabel::StokesRight)
                        : BoundaryLabel::DarcySide;
    } else {
      throw std::runtime_error(
          "classify_facets: boundary facet off the unit-square outline");
    }
    (void)split;
  }
}

Mesh build_structured_mesh(const MeshParams& params) {
  if (params.nx < 1 || params.ny < 1)
    throw std::invalid_argument("build_structured_mesh: nx, ny must be >= 1");
  if (!(params.split_y > 0.0 && params.split_y < 1.0))
    throw std::invalid_argument(
        "build_structured_mesh: split_y must lie strictly inside (0,1)");
  const double rows = params.ny * params.split_y;
  const double rounded = std::round(rows);
  if (std::abs(rows - rounded) > 1e-9)
    throw std::invalid_argument(
        "build_structured_mesh: ny*split_y = " + std::to_string(rows) +
        " is not an integer; the region interface must coincide with a mesh "
        "row");
  const int rows_below = static_cast<int>(rounded);
  if (rows_below < 1 || rows_below > params.ny - 1)
    throw std::invalid_argument(
        "build_structured_mesh: both regions need at least one cell row");

  Mesh mesh;
  mesh.split_y = params.split_y;
  const int nx = params.nx, ny = params.ny;
  mesh.vertices.reserve(static_cast<size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.emplace_back(static_cast<double>(i) / nx,
                                 static_cast<double>(j) / ny);
  auto gid = [nx](int i, int j) { return j * (nx + 1) + i; };

  int center_base = mesh.n_vertices();
  if (params.pattern == DiagonalPattern::Crossed) {
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        mesh.vertices.emplace_back((i + 0.5) / nx, (j + 0.5) / ny);
  }

  for (int j = 0; j < ny; ++j) {
    const Region region = (j >= rows_below) ? Region::Stokes : Region::Darcy;
    for (int i = 0; i < nx; ++i) {
      const int v00 = gid(i, j), v10 = gid(i + 1, j);
      const int v01 = gid(i, j + 1), v11 = gid(i + 1, j + 1);
      if (params.pattern == DiagonalPattern::Right) {
        add_cell(mesh, v00, v10, v11, region);
        add_cell(mesh, v00, v11, v01, region);
      } else {
        const int c = center_base + j * nx + i;
        add_cell(mesh, v00, v10, c, region);
        add_cell(mesh, v10, v11, c, region);
        add_cell(mesh, v11, v01, c, region);
        add_cell(mesh, v01, v00, c, region);
      }
    }
  }

  build_facets(mesh);
  classify_facets(mesh);
  return mesh;
}

double mesh_size(const Mesh& mesh) {
  if (mesh.cells.empty())
    throw std::invalid_argument("mesh_size: empty mesh");
  double h = 0.0;
  for (const Cell& c : mesh.cells) h = std::max(h, c.diameter);
  return h;
}

}  // namespace sdt
