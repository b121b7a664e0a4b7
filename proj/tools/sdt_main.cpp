/// @file sdt_main.cpp
/// @brief Command line: `sdt run --config <file> [--out <dir>] [--quiet]`.

#include "CLI11.hpp"
#include "sdt.h"

#include <cstdio>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{
      "Coupled free-flow / porous-medium flow and contaminant transport "
      "solver"};
  app.set_version_flag("--version", sdt_version());
  app.require_subcommand(1);

  CLI::App* run_cmd =
      app.add_subcommand("run", "Execute the experiment described by a JSON "
                                "config and write its artifacts");
  std::string config_path;
  std::string out_dir = "out";
  bool quiet = false;
  run_cmd->add_option("--config", config_path, "JSON run configuration file")
      ->required();
  run_cmd->add_option("--out", out_dir,
                      "Output directory, created if missing (default: out)");
  run_cmd->add_flag("--quiet", quiet, "Suppress progress output");

  CLI11_PARSE(app, argc, argv);

  sdt_run* run = sdt_run_create(config_path.c_str(), out_dir.c_str(),
                                quiet ? 1 : 0);
  if (run == nullptr) {
    std::fprintf(stderr, "error: could not create the run\n");
    return SDT_ERROR;
  }
  const int status = sdt_run_execute(run);
  if (status == SDT_ERROR)
    std::fprintf(stderr, "error: %s\n", sdt_run_message(run));
  else if (status == SDT_GATE_FAILED && quiet)
    std::fprintf(stderr, "one or more acceptance gates failed; see %s\n",
                 (out_dir + "/run_summary.txt").c_str());
  sdt_run_destroy(run);
  return status;
}
