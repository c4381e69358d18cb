#pragma once

// Run configuration for the tcr tool: one JSON document, with command-line
// flags applied on top. Unknown keys are rejected so typos do not silently
// fall back to defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tcr/discretize.hpp"
#include "tcr/reallocation.hpp"
#include "tcr/synth.hpp"
#include "tcr/vam.hpp"

namespace tcr::cli {

struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "out";
  std::filesystem::path data;

  int K = 3;
  int L = 3;
  std::vector<double> cutoffs;  // empty -> defaults for L
  CellScheme cells = CellScheme::district_school_type;
  bool include_lambda = false;
  bool supply_from_assigned = false;

  std::size_t replications = 1000;
  unsigned threads = 1;
  bool write_draws = true;
  std::vector<std::string> statistics;  // empty -> every pipeline statistic

  bool oracle_columns = false;
  double level = 0.05;
  int verbosity = 0;

  PopulationConfig population;        // K, L, cutoffs and seed come from the fields above
  std::optional<nlohmann::json> params;  // overrides on ProductionParams::defaults(K, L)
  std::optional<VamPolicy> vam;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  CategorySpec category_spec() const;
  PopulationConfig population_config() const;  // requires seed
  ProductionParams production_params() const;
  std::uint64_t require_seed(const std::string& command) const;
};

// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace tcr::cli
