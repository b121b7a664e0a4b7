/// @file config.cpp
/// @brief Strict JSON parsing and validation of run configurations.

#include "sdt/config.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sdt {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& name, const std::string& message) {
  throw std::invalid_argument("config " + name + ": " + message);
}

double read_number(const json& obj, const std::string& key,
                   const std::string& name) {
  const json& v = obj.at(key);
  if (!v.is_number()) fail(name, "key '" + key + "' must be a number");
  return v.get<double>();
}

double read_positive(const json& obj, const std::string& key,
                     const std::string& name) {
  const double v = read_number(obj, key, name);
  if (!(v > 0.0)) fail(name, "key '" + key + "' must be positive");
  return v;
}

int read_int(const json& obj, const std::string& key,
             const std::string& name) {
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    fail(name, "key '" + key + "' must be an integer");
  return v.get<int>();
}

bool read_bool(const json& obj, const std::string& key,
               const std::string& name) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(name, "key '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string read_string(const json& obj, const std::string& key,
                        const std::string& name) {
  const json& v = obj.at(key);
  if (!v.is_string()) fail(name, "key '" + key + "' must be a string");
  return v.get<std::string>();
}

DiagonalPattern read_pattern(const json& obj, const std::string& name) {
  const std::string s = read_string(obj, "pattern", name);
  if (s == "right") return DiagonalPattern::Right;
  if (s == "crossed") return DiagonalPattern::Crossed;
  fail(name, "key 'pattern' must be \"right\" or \"crossed\"");
}

void check_even_rows(int n, double split_y, const char* key,
                     const std::string& name) {
  const double rows = n * split_y;
  if (std::abs(rows - std::lround(rows)) > 1e-9)
    fail(name, std::string("key '") + key +
                   "': the region split must land on a mesh line "
                   "(n * split_y must be an integer)");
}

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& scope, const std::string& name) {
  for (const auto& item : obj.items())
    if (allowed.find(item.key()) == allowed.end())
      fail(name, "unknown key '" + item.key() + "' " + scope);
}

void read_degrees(const json& obj, const std::string& name, RunConfig& cfg) {
  if (obj.contains("velocity_degree"))
    cfg.velocity_degree = read_int(obj, "velocity_degree", name);
  if (cfg.velocity_degree < 2 || cfg.velocity_degree > 4)
    fail(name, "key 'velocity_degree' must be between 2 and 4");
  if (obj.contains("concentration_degree"))
    cfg.concentration_degree = read_int(obj, "concentration_degree", name);
  else
    cfg.concentration_degree = cfg.velocity_degree - 1;
  if (cfg.concentration_degree < 1 || cfg.concentration_degree > 4)
    fail(name, "key 'concentration_degree' must be between 1 and 4");
}

void read_penalties(const json& obj, const std::string& name, RunConfig& cfg) {
  if (obj.contains("flow_penalty"))
    cfg.flow_penalty = read_positive(obj, "flow_penalty", name);
  if (obj.contains("transport_penalty"))
    cfg.transport_penalty = read_positive(obj, "transport_penalty", name);
}

/// The reference problem drives the flow with a nonzero interior mass
/// source, so coupled runs need the concentration space exactly one degree
/// below the velocity space; anything else either breaks compatibility or
/// gives up attainable accuracy.
void check_degree_pairing(const std::string& name, const RunConfig& cfg) {
  if (cfg.concentration_degree != cfg.velocity_degree - 1)
    fail(name,
         "concentration_degree must equal velocity_degree - 1 (got " +
             std::to_string(cfg.concentration_degree) + " with velocity " +
             "degree " + std::to_string(cfg.velocity_degree) +
             "); the reference problem has a nonzero interior mass source, "
             "and preserving uniform concentrations requires the "
             "concentration space to sit one degree below the velocity "
             "space");
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Convergence: return "convergence";
    case ExperimentKind::Compatibility: return "compatibility";
    case ExperimentKind::Contaminant: return "contaminant";
    case ExperimentKind::Custom: return "custom";
  }
  return "unknown";
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

RunConfig parse_config_text(const std::string& text, const std::string& name) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(name, std::string("not valid JSON (") + e.what() + ")");
  }
  if (!root.is_object()) fail(name, "the top level must be a JSON object");
  if (!root.contains("experiment"))
    fail(name, "key 'experiment' is required");

  RunConfig cfg;
  cfg.source_name = name;
  cfg.config_hash = fnv1a64(text);

  const std::string experiment = read_string(root, "experiment", name);
  if (experiment == "convergence") {
    cfg.experiment = ExperimentKind::Convergence;
  } else if (experiment == "compatibility") {
    cfg.experiment = ExperimentKind::Compatibility;
  } else if (experiment == "contaminant") {
    cfg.experiment = ExperimentKind::Contaminant;
  } else if (experiment == "custom") {
    cfg.experiment = ExperimentKind::Custom;
  } else {
    fail(name,
         "key 'experiment' must be one of \"convergence\", "
         "\"compatibility\", \"contaminant\", \"custom\"");
  }

  switch (cfg.experiment) {
    case ExperimentKind::Convergence: {
      reject_unknown_keys(root,
                          {"experiment", "velocity_degree",
                           "concentration_degree", "mesh_sizes", "pattern",
                           "final_time", "max_dt", "with_transport", "mu",
                           "kappa", "flow_penalty", "transport_penalty"},
                          "for experiment 'convergence'", name);
      read_degrees(root, name, cfg);
      read_penalties(root, name, cfg);
      if (root.contains("with_transport"))
        cfg.with_transport = read_bool(root, "with_transport", name);
      if (cfg.with_transport) check_degree_pairing(name, cfg);
      if (root.contains("pattern")) cfg.pattern = read_pattern(root, name);
      if (root.contains("final_time"))
        cfg.final_time = read_positive(root, "final_time", name);
      if (root.contains("max_dt"))
        cfg.max_dt = read_positive(root, "max_dt", name);
      if (root.contains("mu")) cfg.mu = read_positive(root, "mu", name);
      if (root.contains("kappa"))
        cfg.kappa = read_positive(root, "kappa", name);
      if (root.contains("mesh_sizes")) {
        const json& sizes = root.at("mesh_sizes");
        if (!sizes.is_array() || sizes.size() < 2)
          fail(name,
               "key 'mesh_sizes' must be an array of at least two sizes");
        for (const json& s : sizes) {
          if (!s.is_number_integer() || s.get<int>() < 2)
            fail(name, "key 'mesh_sizes' entries must be integers >= 2");
          cfg.mesh_sizes.push_back(s.get<int>());
        }
        for (size_t i = 1; i < cfg.mesh_sizes.size(); ++i)
          if (cfg.mesh_sizes[i] <= cfg.mesh_sizes[i - 1])
            fail(name, "key 'mesh_sizes' must increase strictly");
        for (const int n : cfg.mesh_sizes)
          check_even_rows(n, 0.5, "mesh_sizes", name);
      } else {
        cfg.mesh_sizes = cfg.concentration_degree >= 2
                             ? std::vector<int>{4, 8, 16}
                             : std::vector<int>{8, 16, 32};
      }
      break;
    }
    case ExperimentKind::Compatibility: {
      reject_unknown_keys(root,
                          {"experiment", "velocity_degree",
                           "concentration_degree", "nx", "ny", "pattern",
                           "dt", "final_time", "background", "mu", "kappa",
                           "flow_penalty", "transport_penalty"},
                          "for experiment 'compatibility'", name);
      read_degrees(root, name, cfg);
      read_penalties(root, name, cfg);
      check_degree_pairing(name, cfg);
      cfg.nx = 12;
      cfg.ny = 12;
      if (root.contains("nx")) cfg.nx = read_int(root, "nx", name);
      if (root.contains("ny")) cfg.ny = read_int(root, "ny", name);
      if (cfg.nx < 2 || cfg.ny < 2)
        fail(name, "keys 'nx' and 'ny' must be at least 2");
      check_even_rows(cfg.ny, cfg.split_y, "ny", name);
      if (root.contains("pattern")) cfg.pattern = read_pattern(root, name);
      if (root.contains("dt")) cfg.dt = read_positive(root, "dt", name);
      if (root.contains("final_time"))
        cfg.final_time = read_positive(root, "final_time", name);
      if (root.contains("background")) {
        cfg.background = read_number(root, "background", name);
        if (!std::isfinite(cfg.background))
          fail(name, "key 'background' must be finite");
      }
      if (root.contains("mu")) cfg.mu = read_positive(root, "mu", name);
      if (root.contains("kappa"))
        cfg.kappa = read_positive(root, "kappa", name);
      break;
    }
    case ExperimentKind::Contaminant: {
      reject_unknown_keys(root,
                          {"experiment", "preset", "nx", "dt", "final_time",
                           "snapshot_times", "velocity_degree",
                           "concentration_degree", "flow_penalty",
                           "transport_penalty", "mu", "alpha", "kappa",
                           "porosity"},
                          "for experiment 'contaminant'", name);
      cfg.velocity_degree = 3;
      cfg.concentration_degree = 2;
      read_degrees(root, name, cfg);
      if (!root.contains("concentration_degree"))
        cfg.concentration_degree = cfg.velocity_degree - 1;
      read_penalties(root, name, cfg);
      cfg.pattern = DiagonalPattern::Right;
      cfg.final_time = 10.0;
      if (root.contains("preset")) {
        cfg.preset = read_string(root, "preset", name);
        if (cfg.preset != "full" && cfg.preset != "ci")
          fail(name, "key 'preset' must be \"full\" or \"ci\"");
      }
      cfg.nx = cfg.preset == "ci" ? 22 : 86;
      cfg.ny = cfg.nx;
      if (root.contains("nx")) {
        cfg.nx = read_int(root, "nx", name);
        if (cfg.nx < 2) fail(name, "key 'nx' must be at least 2");
        cfg.ny = cfg.nx;
      }
      check_even_rows(cfg.ny, cfg.split_y, "nx", name);
      if (root.contains("dt")) cfg.dt = read_positive(root, "dt", name);
      if (root.contains("final_time"))
        cfg.final_time = read_positive(root, "final_time", name);
      cfg.snapshot_times = {0.0, 3.3, 6.6, cfg.final_time};
      if (root.contains("snapshot_times")) {
        const json& times = root.at("snapshot_times");
        if (!times.is_array() || times.empty())
          fail(name, "key 'snapshot_times' must be a non-empty array");
        cfg.snapshot_times.clear();
        for (const json& t : times) {
          if (!t.is_number())
            fail(name, "key 'snapshot_times' entries must be numbers");
          cfg.snapshot_times.push_back(t.get<double>());
        }
        for (size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
          if (cfg.snapshot_times[i] < 0.0 ||
              cfg.snapshot_times[i] > cfg.final_time)
            fail(name,
                 "key 'snapshot_times' entries must lie in [0, final_time]");
          if (i > 0 && cfg.snapshot_times[i] <= cfg.snapshot_times[i - 1])
            fail(name, "key 'snapshot_times' must increase strictly");
        }
      }
      if (root.contains("mu"))
        cfg.contaminant_mu = read_positive(root, "mu", name);
      if (root.contains("alpha"))
        cfg.contaminant_alpha = read_positive(root, "alpha", name);
      if (root.contains("kappa")) {
        const json& k = root.at("kappa");
        if (k.is_string()) {
          if (k.get<std::string>() != "heterogeneous")
            fail(name,
                 "key 'kappa' must be a positive number or "
                 "\"heterogeneous\"");
          cfg.heterogeneous_kappa = true;
        } else if (k.is_number() && k.get<double>() > 0.0) {
          cfg.heterogeneous_kappa = false;
          cfg.contaminant_kappa = k.get<double>();
        } else {
          fail(name,
               "key 'kappa' must be a positive number or \"heterogeneous\"");
        }
      }
      if (root.contains("porosity")) {
        const json& phi = root.at("porosity");
        if (!phi.is_object())
          fail(name, "key 'porosity' must be an object");
        reject_unknown_keys(phi, {"free_flow", "porous"}, "inside 'porosity'",
                            name);
        if (phi.contains("free_flow"))
          cfg.porosity_free_flow = read_positive(phi, "free_flow", name);
        if (phi.contains("porous"))
          cfg.porosity_porous = read_positive(phi, "porous", name);
      }
      break;
    }
    case ExperimentKind::Custom: {
      reject_unknown_keys(root,
                          {"experiment", "nx", "ny", "pattern",
                           "velocity_degree", "concentration_degree",
                           "flow_penalty", "transport_penalty", "mu", "kappa",
                           "dt", "final_time", "with_transport"},
                          "for experiment 'custom'", name);
      read_degrees(root, name, cfg);
      read_penalties(root, name, cfg);
      if (root.contains("with_transport"))
        cfg.with_transport = read_bool(root, "with_transport", name);
      if (cfg.with_transport) check_degree_pairing(name, cfg);
      cfg.nx = 8;
      cfg.ny = 8;
      if (root.contains("nx")) cfg.nx = read_int(root, "nx", name);
      if (root.contains("ny")) cfg.ny = read_int(root, "ny", name);
      if (cfg.nx < 2 || cfg.ny < 2)
        fail(name, "keys 'nx' and 'ny' must be at least 2");
      check_even_rows(cfg.ny, cfg.split_y, "ny", name);
      if (root.contains("pattern")) cfg.pattern = read_pattern(root, name);
      if (root.contains("mu")) cfg.mu = read_positive(root, "mu", name);
      if (root.contains("kappa"))
        cfg.kappa = read_positive(root, "kappa", name);
      if (root.contains("dt")) cfg.dt = read_positive(root, "dt", name);
      if (root.contains("final_time"))
        cfg.final_time = read_positive(root, "final_time", name);
      break;
    }
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

}  // namespace sdt
