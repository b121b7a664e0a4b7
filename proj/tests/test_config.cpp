/// @file test_config.cpp
/// @brief Config parsing/validation and the VTK snapshot writer.

#include "doctest.h"

#include "sdt/config.hpp"
#include "sdt/fespace.hpp"
#include "sdt/vtk.hpp"

#include <cstdio>
#include <fstream>
#include <string>

using namespace sdt;

// ---------------------------------------------------------------------------
// Hashing
// ---------------------------------------------------------------------------

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(fnv1a64("abc") != fnv1a64("abd"));
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

TEST_CASE("minimal configs fill in the standard values") {
  SUBCASE("compatibility") {
    const RunConfig cfg =
        parse_config_text(R"({"experiment": "compatibility"})", "inline");
    CHECK(cfg.experiment == ExperimentKind::Compatibility);
    CHECK(cfg.velocity_degree == 2);
    CHECK(cfg.concentration_degree == 1);
    CHECK(cfg.nx == 12);
    CHECK(cfg.ny == 12);
    CHECK(cfg.pattern == DiagonalPattern::Crossed);
    CHECK(cfg.dt == 1e-3);
    CHECK(cfg.final_time == 1.0);
    CHECK(cfg.background == 1.0);
    CHECK(cfg.flow_penalty == -1.0);
    CHECK(cfg.transport_penalty == -1.0);
    CHECK(cfg.config_hash ==
          fnv1a64(R"({"experiment": "compatibility"})"));
    CHECK(cfg.source_name == "inline");
  }

  SUBCASE("convergence ladders follow the concentration degree") {
    const RunConfig low =
        parse_config_text(R"({"experiment": "convergence"})", "inline");
    CHECK(low.velocity_degree == 2);
    CHECK(low.concentration_degree == 1);
    CHECK(low.mesh_sizes == std::vector<int>{8, 16, 32});
    CHECK(low.with_transport);
    CHECK(low.final_time == 1.0);
    CHECK(low.max_dt == 1e-3);

    const RunConfig high = parse_config_text(
        R"({"experiment": "convergence", "velocity_degree": 3})", "inline");
    CHECK(high.concentration_degree == 2);
    CHECK(high.mesh_sizes == std::vector<int>{4, 8, 16});
  }

  SUBCASE("contaminant presets") {
    const RunConfig full =
        parse_config_text(R"({"experiment": "contaminant"})", "inline");
    CHECK(full.preset == "full");
    CHECK(full.nx == 86);
    CHECK(full.velocity_degree == 3);
    CHECK(full.concentration_degree == 2);
    CHECK(full.pattern == DiagonalPattern::Right);
    CHECK(full.final_time == 10.0);
    CHECK(full.snapshot_times == std::vector<double>{0.0, 3.3, 6.6, 10.0});
    CHECK(full.heterogeneous_kappa);
    CHECK(full.contaminant_mu == 0.1);
    CHECK(full.contaminant_alpha == 0.5);
    CHECK(full.porosity_porous == 2.5);

    const RunConfig ci = parse_config_text(
        R"({"experiment": "contaminant", "preset": "ci"})", "inline");
    CHECK(ci.nx == 22);

    const RunConfig constant_kappa = parse_config_text(
        R"({"experiment": "contaminant", "kappa": 500.0})", "inline");
    CHECK_FALSE(constant_kappa.heterogeneous_kappa);
    CHECK(constant_kappa.contaminant_kappa == 500.0);
  }

  SUBCASE("custom") {
    const RunConfig cfg = parse_config_text(
        R"({"experiment": "custom", "nx": 6, "ny": 4,
            "pattern": "right", "final_time": 0.25})",
        "inline");
    CHECK(cfg.nx == 6);
    CHECK(cfg.ny == 4);
    CHECK(cfg.pattern == DiagonalPattern::Right);
    CHECK(cfg.final_time == 0.25);
    CHECK(cfg.split_y == 0.5);
  }
}

TEST_CASE("config validation names the offending key") {
  const auto message_of = [](const std::string& text) {
    try {
      parse_config_text(text, "bad");
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };

  SUBCASE("experiment is required and checked") {
    CHECK(message_of(R"({})").find("experiment") != std::string::npos);
    CHECK(message_of(R"({"experiment": "magic"})").find("experiment") !=
          std::string::npos);
  }

  SUBCASE("unknown keys are rejected") {
    const std::string msg = message_of(
        R"({"experiment": "convergence", "meshsizes": [4, 8]})");
    CHECK(msg.find("meshsizes") != std::string::npos);
    CHECK(msg.find("convergence") != std::string::npos);
  }

  SUBCASE("keys of other experiments are rejected too") {
    CHECK(message_of(R"({"experiment": "convergence", "background": 2.0})")
              .find("background") != std::string::npos);
  }

  SUBCASE("degree pairing is enforced for coupled runs") {
    const std::string msg = message_of(
        R"({"experiment": "convergence", "velocity_degree": 2,
            "concentration_degree": 2})");
    CHECK(msg.find("concentration_degree") != std::string::npos);
    // A flow-only study may pick the degrees independently.
    CHECK_NOTHROW(parse_config_text(
        R"({"experiment": "convergence", "velocity_degree": 2,
            "concentration_degree": 2, "with_transport": false})",
        "inline"));
  }

  SUBCASE("penalties must be positive when given") {
    CHECK(message_of(
              R"({"experiment": "compatibility", "transport_penalty": -1})")
              .find("transport_penalty") != std::string::npos);
    CHECK(message_of(R"({"experiment": "compatibility", "flow_penalty": 0})")
              .find("flow_penalty") != std::string::npos);
  }

  SUBCASE("types and ranges are validated") {
    CHECK(message_of(R"({"experiment": "compatibility", "dt": "small"})")
              .find("dt") != std::string::npos);
    CHECK(message_of(R"({"experiment": "compatibility", "dt": -0.1})")
              .find("dt") != std::string::npos);
    CHECK(message_of(R"({"experiment": "convergence", "mesh_sizes": [4]})")
              .find("mesh_sizes") != std::string::npos);
    CHECK(message_of(R"({"experiment": "convergence", "mesh_sizes": [8, 4]})")
              .find("mesh_sizes") != std::string::npos);
    CHECK(message_of(R"({"experiment": "convergence", "mesh_sizes": [6, 9]})")
              .find("mesh_sizes") != std::string::npos);
    CHECK(message_of(R"({"experiment": "compatibility", "ny": 5})")
              .find("ny") != std::string::npos);
    CHECK(message_of(R"({"experiment": "contaminant", "preset": "tiny"})")
              .find("preset") != std::string::npos);
    CHECK(message_of(
              R"({"experiment": "contaminant", "snapshot_times": [2, 1]})")
              .find("snapshot_times") != std::string::npos);
    CHECK(message_of(R"({"experiment": "contaminant", "kappa": "magic"})")
              .find("kappa") != std::string::npos);
    CHECK(message_of(
              R"({"experiment": "contaminant", "porosity": {"solid": 1}})")
              .find("solid") != std::string::npos);
    CHECK(message_of(R"(not json)").find("JSON") != std::string::npos);
    CHECK(message_of(R"([1, 2, 3])").find("object") != std::string::npos);
  }
}

TEST_CASE("config files round-trip through the filesystem") {
  const std::string path = "test_config_tmp.json";
  const std::string text =
      R"({"experiment": "compatibility", "nx": 6, "ny": 6})";
  {
    std::ofstream out(path, std::ios::binary);
    out << text;
  }
  const RunConfig cfg = parse_config(path);
  CHECK(cfg.nx == 6);
  CHECK(cfg.config_hash == fnv1a64(text));
  CHECK(cfg.source_name == path);
  std::remove(path.c_str());

  CHECK_THROWS_AS(parse_config("no_such_config_file.json"),
                  std::runtime_error);
}

// ---------------------------------------------------------------------------
// VTK writer
// ---------------------------------------------------------------------------

TEST_CASE("vtk writer emits a well-formed legacy grid") {
  const Mesh mesh = build_structured_mesh({2, 2, 0.5, DiagonalPattern::Right});
  REQUIRE(mesh.n_vertices() == 9);
  REQUIRE(mesh.n_cells() == 8);

  VtkOutput output;
  std::vector<double> region(8);
  for (int c = 0; c < 8; ++c)
    region[static_cast<size_t>(c)] =
        mesh.cells[static_cast<size_t>(c)].region == Region::Darcy ? 1.0 : 0.0;
  output.cell_scalars.emplace_back("region", region);
  output.point_scalars.emplace_back("concentration",
                                    std::vector<double>(9, 0.25));
  output.point_vectors.emplace_back("velocity",
                                    std::vector<Vec2>(9, Vec2{1.0, -2.0}));

  const std::string vtk = vtk_unstructured_grid(mesh, "snapshot", output);
  CHECK(vtk.rfind("# vtk DataFile Version 2.0\nsnapshot\nASCII\n"
                  "DATASET UNSTRUCTURED_GRID\n",
                  0) == 0);
  CHECK(vtk.find("POINTS 9 double\n") != std::string::npos);
  CHECK(vtk.find("CELLS 8 32\n") != std::string::npos);
  CHECK(vtk.find("CELL_TYPES 8\n") != std::string::npos);
  CHECK(vtk.find("CELL_DATA 8\nSCALARS region double 1\n"
                 "LOOKUP_TABLE default\n") != std::string::npos);
  CHECK(vtk.find("POINT_DATA 9\nSCALARS concentration double 1\n") !=
        std::string::npos);
  CHECK(vtk.find("VECTORS velocity double\n1 -2 0\n") != std::string::npos);
  // Deterministic: a second serialization is byte-identical.
  CHECK(vtk == vtk_unstructured_grid(mesh, "snapshot", output));

  SUBCASE("field length mismatches are rejected") {
    VtkOutput bad;
    bad.cell_scalars.emplace_back("region", std::vector<double>(5, 0.0));
    CHECK_THROWS_AS(vtk_unstructured_grid(mesh, "snapshot", bad),
                    std::invalid_argument);
  }
}

TEST_CASE("field sampling reproduces in-space fields exactly") {
  const Mesh mesh = build_structured_mesh({3, 4, 0.5, DiagonalPattern::Right});
  const auto linear = [](const Vec2& x, int) {
    return 2.0 * x.x + 3.0 * x.y - 1.0;
  };

  const CellSpace scalar = build_cell_space(mesh, 1, 1);
  const std::vector<double> coeff =
      l2_project_cells(scalar, mesh, quadrature_triangle(4), linear);

  const std::vector<double> at_vertices =
      sample_at_vertices(scalar, mesh, coeff);
  REQUIRE(static_cast<int>(at_vertices.size()) == mesh.n_vertices());
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 x = mesh.vertices[static_cast<size_t>(v)];
    CHECK(at_vertices[static_cast<size_t>(v)] ==
          doctest::Approx(linear(x, 0)).epsilon(1e-12));
  }

  const std::vector<double> at_cells = sample_at_cells(scalar, mesh, coeff);
  const CellMap map = cell_map(mesh, 0);
  const Vec2 centroid = map.to_physical({1.0 / 3.0, 1.0 / 3.0});
  CHECK(at_cells[0] == doctest::Approx(linear(centroid, 0)).epsilon(1e-12));

  const CellSpace vector = build_cell_space(mesh, 1, 2);
  const std::vector<double> vcoeff = l2_project_cells(
      vector, mesh, quadrature_triangle(4), [](const Vec2& x, int d) {
        return d == 0 ? x.x : -x.y;
      });
  const std::vector<Vec2> vec = sample_vector_at_vertices(vector, mesh, vcoeff);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Vec2 x = mesh.vertices[static_cast<size_t>(v)];
    CHECK(vec[static_cast<size_t>(v)].x == doctest::Approx(x.x).epsilon(1e-12));
    CHECK(vec[static_cast<size_t>(v)].y ==
          doctest::Approx(-x.y).epsilon(1e-12));
  }

  CHECK_THROWS_AS(sample_vector_at_vertices(scalar, mesh, coeff),
                  std::invalid_argument);
}
