#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "efg/solver.hpp"

namespace efg {

/// JSON run configuration. Top-level keys: geometry, materials, bcs
/// (required); approx, solver, output (optional). Schema violations throw
/// ConfigError naming the offending field path, e.g. "solver.dt".
/// Relative file paths resolve against base_dir.
Problem problem_from_json(const nlohmann::json& config, const std::filesystem::path& base_dir = {});

Problem load_problem(const std::filesystem::path& config_file);

/// Builds the model described by a "geometry" block.
Model build_geometry(const nlohmann::json& geometry, const std::filesystem::path& base_dir = {});

/// Preset benchmarks.
const std::vector<std::string>& preset_names();

struct PresetOptions {
  int level = 1;
  std::optional<double> poisson;
  std::optional<double> depth;  // indentation depth, m
};

/// Complete run configuration of a named benchmark. Throws ConfigError for
/// unknown names or levels.
nlohmann::json preset_config(const std::string& name, const PresetOptions& options = {});

}  // namespace efg
