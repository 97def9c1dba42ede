#pragma once

#include <map>
#include <string>
#include <vector>

#include "cvlab/cartoon.hpp"
#include "cvlab/frame.hpp"
#include "json.hpp"

namespace cvlab {

// One command run: pass flag, one-line summary, JSON report and extra artifacts
// (CSV and JSON text) keyed by file name.
struct ExperimentOutput {
  bool pass = false;
  std::string summary;
  nlohmann::ordered_json report;
  std::map<std::string, std::string> files;
};

// frame-selftest, geometry, decay, nla, oracle.
const std::vector<std::string>& experiment_commands();

// Built-in configuration of a command.
nlohmann::ordered_json default_config(const std::string& command);

// Overlays config on the defaults. Objects merge key by key; values under
// "model", "L" and "k" and all arrays are replaced whole. Unknown keys throw
// ConfigError naming their path. Decay configs are taken as given: the sweeps
// present are the sweeps that run.
nlohmann::ordered_json resolve_config(const std::string& command, const nlohmann::ordered_json& config);

// Validates and runs a resolved config. threads changes speed only.
ExperimentOutput run_experiment(const std::string& command, const nlohmann::ordered_json& config,
                                unsigned threads = 1);

// A built-in model name or a model object.
CartoonFunction model_from_config(const nlohmann::json& j);

// {"j0", "base_angles", "smoothness"} on a grid.
FrameSpec frame_from_config(const GridSpec& grid, const nlohmann::json& frame);

// Library, FFTW, Boost and compiler versions.
nlohmann::ordered_json build_info();

}  // namespace cvlab
