#pragma once
/// @file config.hpp
/// @brief JSON run configurations for the command-line experiments.
///
/// A configuration selects one of four experiments and overrides a small,
/// experiment-specific set of knobs; everything it does not mention keeps
/// the standard value (penalties 10 k^2 and 6 l^2, the usual degrees, the
/// published demo coefficients).  Parsing is strict: unknown keys, keys
/// that the chosen experiment does not use, wrong types, and out-of-range
/// values are all rejected with the offending key named in the message.

#include "sdt/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdt {

enum class ExperimentKind { Convergence, Compatibility, Contaminant, Custom };

std::string to_string(ExperimentKind kind);

/// Fully validated run configuration with every default filled in.
struct RunConfig {
  ExperimentKind experiment = ExperimentKind::Convergence;

  // Discretization.
  int velocity_degree = 2;       ///< k; pressure degree k-1
  int concentration_degree = 1;  ///< l
  double flow_penalty = -1.0;      ///< negative = default 10 k^2
  double transport_penalty = -1.0; ///< negative = default 6 l^2

  // Mesh (single-mesh experiments).
  int nx = 0;
  int ny = 0;
  double split_y = 0.5;
  DiagonalPattern pattern = DiagonalPattern::Crossed;

  // Refinement ladder (convergence experiment).
  std::vector<int> mesh_sizes;
  bool with_transport = true;

  // Coefficients of the closed-form reference problem.
  double mu = 1.0;
  double kappa = 1.0;

  // Time stepping.
  double dt = 1e-3;
  double max_dt = 1e-3;  ///< ladder rule dt = min(max_dt, h^2/4)
  double final_time = 1.0;

  // Compatibility experiment.
  double background = 1.0;

  // Contaminant demo.
  std::string preset = "full";  ///< "full" or "ci" (quarter resolution)
  std::vector<double> snapshot_times;
  double contaminant_mu = 0.1;
  double contaminant_alpha = 0.5;
  bool heterogeneous_kappa = true;  ///< false = constant contaminant_kappa
  double contaminant_kappa = 700.0;
  double porosity_free_flow = 1.0;
  double porosity_porous = 2.5;

  // Provenance of the parsed file.
  std::string source_name;
  std::uint64_t config_hash = 0;  ///< FNV-1a 64 of the raw file bytes
};

/// 64-bit FNV-1a hash of a byte string (stable across platforms; used to
/// stamp outputs with the configuration they came from).
std::uint64_t fnv1a64(const std::string& bytes);

/// Parse and validate a configuration from raw JSON text; `name` labels the
/// source in error messages and in RunConfig::source_name.  Throws
/// std::invalid_argument on any violation.
RunConfig parse_config_text(const std::string& text, const std::string& name);

/// Parse and validate the configuration file at `path`.  Throws
/// std::runtime_error when the file cannot be read and
/// std::invalid_argument on validation failures.
RunConfig parse_config(const std::string& path);

}  // namespace sdt
