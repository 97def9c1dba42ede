#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cvlab/error.hpp"
#include "cvlab/experiments.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr const char* kOutputRootEnv = "CVLAB_OUTPUT_ROOT";

ojson read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw cvlab::ConfigError("cannot read '" + path.string() + "'");
  try {
    return ojson::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw cvlab::ConfigError("'" + path.string() + "': " + e.what());
  }
}

// Top-level "<key>_file" entries are replaced by "<key>" holding that file's
// JSON, resolved relative to the config's directory.
void inline_file_references(ojson& config, const fs::path& base_dir) {
  std::vector<std::string> keys;
  for (auto it = config.begin(); it != config.end(); ++it)
    if (it.key().size() > 5 && it.key().ends_with("_file")) keys.push_back(it.key());
  for (const auto& key : keys) {
    if (!config[key].is_string()) throw cvlab::ConfigError("'" + key + "' must be a path");
    fs::path p = config[key].get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    const std::string target = key.substr(0, key.size() - 5);
    if (config.contains(target)) throw cvlab::ConfigError("both '" + key + "' and '" + target + "' given");
    config[target] = read_json_file(p);
    config.erase(key);
  }
}

// "a.b.c=value"; value is JSON when it parses, a string otherwise.
void apply_override(ojson& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw cvlab::ConfigError("--set expects path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  ojson value;
  try {
    value = ojson::parse(text);
  } catch (const nlohmann::json::exception&) {
    value = text;
  }
  ojson* node = &config;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw cvlab::ConfigError("--set: empty path segment in '" + path + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const bool last = i + 1 == parts.size();
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(parts[i]);
      } catch (const std::exception&) {
        throw cvlab::ConfigError("--set: '" + parts[i] + "' is not an array index");
      }
      if (idx >= node->size()) throw cvlab::ConfigError("--set: index " + parts[i] + " out of range");
      node = &(*node)[idx];
    } else {
      if (node->is_null()) *node = ojson::object();
      if (!node->is_object()) throw cvlab::ConfigError("--set: '" + parts[i] + "' is below a non-object value");
      node = &(*node)[parts[i]];
    }
    if (last) *node = value;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

fs::path output_dir(const std::string& requested, const std::string& command) {
  if (!requested.empty()) return requested;
  const char* root = std::getenv(kOutputRootEnv);
  return fs::path(root && *root ? root : "cvlab-output") / command;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curvelet decay and approximation laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cvlab::build_info().dump());

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool print_config = false;

  const std::vector<std::pair<std::string, std::string>> descriptions{
      {"frame-selftest", "Round trip, Parseval, window partition and vanishing moments"},
      {"geometry", "Region partition, twisting map and derivative-bound checks"},
      {"decay", "Coefficient decay sweeps and claim verdict"},
      {"nla", "M-term approximation curves and rate fit"},
      {"oracle", "Frequency-domain coefficients against direct quadrature"}};
  for (const auto& [name, text] : descriptions) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("-s,--set", overrides, "Override path.to.key=value (repeatable)");
    sub->add_option("-t,--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("-o,--out", out_dir, std::string("Output directory (default $") + kOutputRootEnv + "/<command>)");
    sub->add_flag("--print-config", print_config, "Print the resolved config and exit");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ojson config;
  try {
    if (!config_path.empty()) {
      config = read_json_file(config_path);
      if (!config.is_object()) throw cvlab::ConfigError("config must be a JSON object");
      inline_file_references(config, fs::path(config_path).parent_path());
    } else {
      config = command == "decay" ? cvlab::default_config(command) : ojson::object();
    }
    for (const auto& o : overrides) apply_override(config, o);
    config = cvlab::resolve_config(command, config);
  } catch (const cvlab::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (print_config) {
    std::cout << config.dump(2) << '\n';
    return kExitPass;
  }

  cvlab::ExperimentOutput result;
  try {
    result = cvlab::run_experiment(command, config, threads);
  } catch (const cvlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cvlab::ResolutionError& e) {
    std::cerr << "resolution error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const cvlab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }

  try {
    const fs::path dir = output_dir(out_dir, command);
    fs::create_directories(dir);
    ojson files = ojson::array({"report.json"});
    write_text(dir / "report.json", result.report.dump(2));
    for (const auto& [name, text] : result.files) {
      write_text(dir / name, text);
      files.push_back(name);
    }
    ojson manifest;
    manifest["command"] = command;
    manifest["config"] = config;
    manifest["seed"] = config.contains("seed") ? config["seed"] : ojson(nullptr);
    manifest["threads"] = threads;
    manifest["versions"] = cvlab::build_info();
    manifest["status"] = result.pass ? "PASS" : "FAIL";
    manifest["summary"] = result.summary;
    manifest["files"] = files;
    write_text(dir / "manifest.json", manifest.dump(2));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  std::cout << result.summary << '\n';
  return result.pass ? kExitPass : kExitFail;
}
