/// @file capi.cpp
/// @brief C API wrapper: opaque run handles over the config-driven
///        experiment runners, with exceptions mapped to status codes.

#include "sdt.h"

#include "sdt/config.hpp"
#include "sdt/experiments.hpp"

#include <exception>
#include <new>
#include <string>

struct sdt_run {
  std::string config_path;
  std::string out_dir;
  bool quiet = false;
  std::string message = "not executed";
};

extern "C" {

sdt_run* sdt_run_create(const char* config_path, const char* out_dir,
                        int quiet) {
  if (config_path == nullptr) return nullptr;
  auto* run = new (std::nothrow) sdt_run;
  if (run == nullptr) return nullptr;
  try {
    run->config_path = config_path;
    run->out_dir = (out_dir != nullptr && out_dir[0] != '\0') ? out_dir : "out";
    run->quiet = quiet != 0;
  } catch (...) {
    delete run;
    return nullptr;
  }
  return run;
}

int sdt_run_execute(sdt_run* run) {
  if (run == nullptr) return SDT_ERROR;
  try {
    const sdt::RunConfig config = sdt::parse_config(run->config_path);
    const sdt::RunResult result =
        sdt::run_experiment(config, run->out_dir, run->quiet);
    std::string text;
    for (const std::string& line : result.messages) text += line + "\n";
    run->message = std::move(text);
    return result.exit_code == 0 ? SDT_OK : SDT_GATE_FAILED;
  } catch (const std::exception& error) {
    try {
      run->message = error.what();
    } catch (...) {
      // Leave the previous message in place if even that fails.
    }
    return SDT_ERROR;
  } catch (...) {
    return SDT_ERROR;
  }
}

const char* sdt_run_message(const sdt_run* run) {
  if (run == nullptr) return "";
  return run->message.c_str();
}

void sdt_run_destroy(sdt_run* run) { delete run; }

const char* sdt_version(void) { return "1.0.0"; }

}  // extern "C"
