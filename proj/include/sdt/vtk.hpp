#pragma once
/// @file vtk.hpp
/// @brief Legacy ASCII VTK 2.0 serialization of meshes and sampled fields.
///
/// Snapshots are written as unstructured triangle grids.  Discontinuous cell
/// fields are either vertex-sampled (averaging the incident cells, which is
/// what the point-data sections hold) or cell-sampled at the centroid.  The
/// writer is deterministic: no timestamps, fixed number formatting.

#include "sdt/fespace.hpp"
#include "sdt/mesh.hpp"

#include <string>
#include <utility>
#include <vector>

namespace sdt {

/// Field data attached to a VTK snapshot.
struct VtkOutput {
  /// One value per cell, written as CELL_DATA scalars.
  std::vector<std::pair<std::string, std::vector<double>>> cell_scalars;
  /// One value per mesh vertex, written as POINT_DATA scalars.
  std::vector<std::pair<std::string, std::vector<double>>> point_scalars;
  /// One 2-vector per mesh vertex, written as POINT_DATA vectors (z = 0).
  std::vector<std::pair<std::string, std::vector<Vec2>>> point_vectors;
};

/// Serialize the mesh and fields as a legacy ASCII VTK 2.0 unstructured
/// grid.  Throws std::invalid_argument when a field's length does not match
/// the mesh.
std::string vtk_unstructured_grid(const Mesh& mesh, const std::string& title,
                                  const VtkOutput& output);

/// Vertex-sampled values of one component of a discontinuous cell field:
/// each vertex averages the evaluations of its incident cells.
std::vector<double> sample_at_vertices(const CellSpace& space,
                                       const Mesh& mesh,
                                       const std::vector<double>& coeff,
                                       int comp = 0);

/// Vertex-sampled 2-vector field (rank-2 cell space).
std::vector<Vec2> sample_vector_at_vertices(const CellSpace& space,
                                            const Mesh& mesh,
                                            const std::vector<double>& coeff);

/// Centroid values of one component of a cell field, one per cell.
std::vector<double> sample_at_cells(const CellSpace& space, const Mesh& mesh,
                                    const std::vector<double>& coeff,
                                    int comp = 0);

}  // namespace sdt
