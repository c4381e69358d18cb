#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "tcr/error.hpp"

namespace tcr::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw InvalidInput("unknown key '" + key + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json population_json(const PopulationConfig& p) {
  return {{"n_districts", p.n_districts},
          {"schools_per_district", p.schools_per_district},
          {"blocks_per_school", p.blocks_per_school},
          {"classrooms_min", p.classrooms_min},
          {"classrooms_max", p.classrooms_max},
          {"class_size_min", p.class_size_min},
          {"class_size_max", p.class_size_max},
          {"practice_beta_a", p.practice_beta_a},
          {"practice_beta_b", p.practice_beta_b},
          {"elementary_share", p.elementary_share},
          {"district_sd", p.district_sd},
          {"sorting_strength", p.sorting_strength},
          {"v_loading", p.v_loading},
          {"noncompliance_rate_teachers", p.noncompliance_rate_teachers},
          {"noncompliance_rate_students", p.noncompliance_rate_students},
          {"attrition_rate", p.attrition_rate},
          {"student_aux_missing_rate", p.student_aux_missing_rate},
          {"endogenous_mode", std::string(to_string(p.endogenous_mode))},
          {"endogenous_strength", p.endogenous_strength}};
}

PopulationConfig population_from_json(const json& j) {
  PopulationConfig p;
  reject_unknown(j, {"n_districts", "schools_per_district", "blocks_per_school", "classrooms_min", "classrooms_max",
                     "classrooms_per_block", "class_size_min", "class_size_max", "practice_beta_a",
                     "practice_beta_b", "elementary_share", "district_sd", "sorting_strength", "v_loading",
                     "noncompliance_rate_teachers", "noncompliance_rate_students", "attrition_rate",
                     "student_aux_missing_rate", "endogenous_mode", "endogenous_strength"},
                 "population");
  read(j, "n_districts", p.n_districts);
  read(j, "schools_per_district", p.schools_per_district);
  read(j, "blocks_per_school", p.blocks_per_school);
  if (j.contains("classrooms_per_block")) p.classrooms_min = p.classrooms_max = j.at("classrooms_per_block").get<int>();
  read(j, "classrooms_min", p.classrooms_min);
  read(j, "classrooms_max", p.classrooms_max);
  read(j, "class_size_min", p.class_size_min);
  read(j, "class_size_max", p.class_size_max);
  read(j, "practice_beta_a", p.practice_beta_a);
  read(j, "practice_beta_b", p.practice_beta_b);
  read(j, "elementary_share", p.elementary_share);
  read(j, "district_sd", p.district_sd);
  read(j, "sorting_strength", p.sorting_strength);
  read(j, "v_loading", p.v_loading);
  read(j, "noncompliance_rate_teachers", p.noncompliance_rate_teachers);
  read(j, "noncompliance_rate_students", p.noncompliance_rate_students);
  read(j, "attrition_rate", p.attrition_rate);
  read(j, "student_aux_missing_rate", p.student_aux_missing_rate);
  if (j.contains("endogenous_mode")) p.endogenous_mode = parse_endogenous_mode(j.at("endogenous_mode").get<std::string>());
  read(j, "endogenous_strength", p.endogenous_strength);
  return p;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  try {
    reject_unknown(j, {"seed", "out", "data", "k", "l", "cutoffs", "cells", "include_lambda", "supply_from_assigned",
                       "replications", "threads", "write_draws", "statistics", "oracle_columns", "level", "verbosity",
                       "population", "params", "vam"},
                   "config");
    RunConfig c;
    if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("data")) c.data = j.at("data").get<std::string>();
    read(j, "k", c.K);
    read(j, "l", c.L);
    read(j, "cutoffs", c.cutoffs);
    if (j.contains("cells")) c.cells = parse_cell_scheme(j.at("cells").get<std::string>());
    read(j, "include_lambda", c.include_lambda);
    read(j, "supply_from_assigned", c.supply_from_assigned);
    read(j, "replications", c.replications);
    read(j, "threads", c.threads);
    read(j, "write_draws", c.write_draws);
    read(j, "statistics", c.statistics);
    read(j, "oracle_columns", c.oracle_columns);
    read(j, "level", c.level);
    read(j, "verbosity", c.verbosity);
    if (j.contains("population")) c.population = population_from_json(j.at("population"));
    if (j.contains("params") && !j.at("params").is_null()) {
      reject_unknown(j.at("params"),
                     {"alpha", "beta", "gamma", "delta", "zeta", "eta", "lambda", "rho", "sd_V", "sd_U"}, "params");
      c.params = j.at("params");
    }
    if (j.contains("vam") && !j.at("vam").is_null()) {
      const auto& v = j.at("vam");
      reject_unknown(v, {"sigma", "tau", "tau_tilde"}, "vam");
      VamPolicy p;
      read(v, "sigma", p.sigma);
      read(v, "tau", p.tau);
      if (v.contains("tau_tilde") && !v.at("tau_tilde").is_null()) p.tau_tilde = v.at("tau_tilde").get<double>();
      c.vam = p;
    }
    return c;
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed ? json(*seed) : json(nullptr);
  j["out"] = out.string();
  j["data"] = data.string();
  j["k"] = K;
  j["l"] = L;
  j["cutoffs"] = cutoffs;
  j["cells"] = std::string(to_string(cells));
  j["include_lambda"] = include_lambda;
  j["supply_from_assigned"] = supply_from_assigned;
  j["replications"] = replications;
  j["threads"] = threads;
  j["write_draws"] = write_draws;
  j["statistics"] = statistics;
  j["oracle_columns"] = oracle_columns;
  j["level"] = level;
  j["verbosity"] = verbosity;
  j["population"] = population_json(population);
  j["params"] = params ? *params : json(nullptr);
  if (vam) {
    j["vam"] = {{"sigma", vam->sigma}, {"tau", vam->tau},
                {"tau_tilde", vam->tau_tilde ? json(*vam->tau_tilde) : json(nullptr)}};
  } else {
    j["vam"] = nullptr;
  }
  return j;
}

CategorySpec RunConfig::category_spec() const {
  CategorySpec s = CategorySpec::defaults(K, L);
  if (!cutoffs.empty()) {
    if (static_cast<int>(cutoffs.size()) != L - 1)
      throw InvalidInput("--cutoffs needs L-1 = " + std::to_string(L - 1) + " values, got " +
                         std::to_string(cutoffs.size()));
    s.teacher_cutoffs = cutoffs;
  }
  s.validate();
  return s;
}

PopulationConfig RunConfig::population_config() const {
  PopulationConfig p = population;
  p.K = K;
  p.L = L;
  p.teacher_cutoffs = cutoffs;
  p.seed = require_seed("synth");
  p.validate();
  return p;
}

ProductionParams RunConfig::production_params() const {
  ProductionParams p = ProductionParams::defaults(K, L);
  if (params) {
    try {
      const auto& j = *params;
      read(j, "alpha", p.alpha);
      read(j, "beta", p.beta);
      read(j, "gamma", p.gamma);
      read(j, "delta", p.delta);
      read(j, "zeta", p.zeta);
      read(j, "eta", p.eta);
      read(j, "lambda", p.lambda);
      read(j, "rho", p.rho);
      read(j, "sd_V", p.sd_V);
      read(j, "sd_U", p.sd_U);
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("params: ") + e.what());
    }
  }
  p.validate(K, L);
  return p;
}

std::uint64_t RunConfig::require_seed(const std::string& command) const {
  if (!seed) throw InvalidInput(command + " is stochastic: a seed is required (--seed or \"seed\" in the config)");
  return *seed;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tcr::cli
