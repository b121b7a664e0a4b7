/// @file vtk.cpp
/// @brief Legacy ASCII VTK 2.0 writer and field sampling helpers.

#include "sdt/vtk.hpp"

#include <cstdio>
#include <stdexcept>

namespace sdt {

namespace {

/// Reference coordinates of the three triangle vertices, in local order.
const Vec2 kRefVertex[3] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string vtk_unstructured_grid(const Mesh& mesh, const std::string& title,
                                  const VtkOutput& output) {
  const size_t np = mesh.vertices.size();
  const size_t nc = mesh.cells.size();
  for (const auto& field : output.cell_scalars)
    if (field.second.size() != nc)
      throw std::invalid_argument("vtk cell field '" + field.first +
                                  "' does not match the cell count");
  for (const auto& field : output.point_scalars)
    if (field.second.size() != np)
      throw std::invalid_argument("vtk point field '" + field.first +
                                  "' does not match the vertex count");
  for (const auto& field : output.point_vectors)
    if (field.second.size() != np)
      throw std::invalid_argument("vtk vector field '" + field.first +
                                  "' does not match the vertex count");

  std::string out;
  out.reserve(64 * (np + nc));
  out += "# vtk DataFile Version 2.0\n";
  out += title;
  out += "\nASCII\nDATASET UNSTRUCTURED_GRID\n";

  char buf[96];
  std::snprintf(buf, sizeof buf, "POINTS %zu double\n", np);
  out += buf;
  for (const Vec2& v : mesh.vertices) {
    append_number(out, v.x);
    out += ' ';
    append_number(out, v.y);
    out += " 0\n";
  }

  std::snprintf(buf, sizeof buf, "CELLS %zu %zu\n", nc, 4 * nc);
  out += buf;
  for (const Cell& cell : mesh.cells) {
    std::snprintf(buf, sizeof buf, "3 %d %d %d\n", cell.v[0], cell.v[1],
                  cell.v[2]);
    out += buf;
  }

  std::snprintf(buf, sizeof buf, "CELL_TYPES %zu\n", nc);
  out += buf;
  for (size_t c = 0; c < nc; ++c) out += "5\n";

  if (!output.cell_scalars.empty()) {
    std::snprintf(buf, sizeof buf, "CELL_DATA %zu\n", nc);
    out += buf;
    for (const auto& field : output.cell_scalars) {
      out += "SCALARS " + field.first + " double 1\nLOOKUP_TABLE default\n";
      for (double v : field.second) {
        append_number(out, v);
        out += '\n';
      }
    }
  }

  if (!output.point_scalars.empty() || !output.point_vectors.empty()) {
    std::snprintf(buf, sizeof buf, "POINT_DATA %zu\n", np);
    out += buf;
    for (const auto& field : output.point_scalars) {
      out += "SCALARS " + field.first + " double 1\nLOOKUP_TABLE default\n";
      for (double v : field.second) {
        append_number(out, v);
        out += '\n';
      }
    }
    for (const auto& field : output.point_vectors) {
      out += "VECTORS " + field.first + " double\n";
      for (const Vec2& v : field.second) {
        append_number(out, v.x);
        out += ' ';
        append_number(out, v.y);
        out += " 0\n";
      }
    }
  }
  return out;
}

std::vector<double> sample_at_vertices(const CellSpace& space,
                                       const Mesh& mesh,
                                       const std::vector<double>& coeff,
                                       int comp) {
  if (static_cast<int>(coeff.size()) != space.n_dofs())
    throw std::invalid_argument("sample_at_vertices: coefficient mismatch");
  std::vector<double> acc(mesh.vertices.size(), 0.0);
  std::vector<int> count(mesh.vertices.size(), 0);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& cell = mesh.cells[static_cast<size_t>(c)];
    for (int e = 0; e < 3; ++e) {
      const size_t v = static_cast<size_t>(cell.v[static_cast<size_t>(e)]);
      acc[v] += eval_cell(space, coeff, c, kRefVertex[e], comp);
      ++count[v];
    }
  }
  for (size_t v = 0; v < acc.size(); ++v)
    if (count[v] > 0) acc[v] /= count[v];
  return acc;
}

std::vector<Vec2> sample_vector_at_vertices(const CellSpace& space,
                                            const Mesh& mesh,
                                            const std::vector<double>& coeff) {
  if (space.rank != 2)
    throw std::invalid_argument(
        "sample_vector_at_vertices expects a rank-2 space");
  const std::vector<double> x = sample_at_vertices(space, mesh, coeff, 0);
  const std::vector<double> y = sample_at_vertices(space, mesh, coeff, 1);
  std::vector<Vec2> out(x.size());
  for (size_t v = 0; v < out.size(); ++v) out[v] = {x[v], y[v]};
  return out;
}

std::vector<double> sample_at_cells(const CellSpace& space, const Mesh& mesh,
                                    const std::vector<double>& coeff,
                                    int comp) {
  if (static_cast<int>(coeff.size()) != space.n_dofs())
    throw std::invalid_argument("sample_at_cells: coefficient mismatch");
  const Vec2 centroid{1.0 / 3.0, 1.0 / 3.0};
  std::vector<double> out(mesh.cells.size(), 0.0);
  for (int c = 0; c < mesh.n_cells(); ++c)
    out[static_cast<size_t>(c)] = eval_cell(space, coeff, c, centroid, comp);
  return out;
}

}  // namespace sdt
