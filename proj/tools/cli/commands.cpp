#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>

#include "tcr/csv.hpp"
#include "tcr/dataset_io.hpp"
#include "tcr/diagnostics.hpp"
#include "tcr/error.hpp"
#include "tcr/inference.hpp"
#include "tcr/matchcore.hpp"
#include "tcr/pipeline.hpp"
#include "tcr/report.hpp"
#include "tcr/version.hpp"

namespace tcr::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path prepare_out(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec || !fs::is_directory(c.out)) throw InvalidInput("cannot create output directory " + c.out.string());
  return c.out;
}

Dataset load_data(const RunConfig& c) {
  if (c.data.empty()) throw InvalidInput("--data is required");
  if (!fs::is_directory(c.data)) throw InvalidInput("data directory " + c.data.string() + " does not exist");
  return import_dataset(c.data);
}

void log(const RunConfig& c, const std::string& msg) {
  if (c.verbosity > 0) std::cerr << msg << '\n';
}

PipelineConfig pipeline_config(const RunConfig& c) {
  PipelineConfig p;
  p.spec = c.category_spec();
  p.design.include_lambda = c.include_lambda;
  p.prediction.include_lambda = c.include_lambda;
  p.prediction.cells = c.cells;
  p.prediction.supply_from_assigned = c.supply_from_assigned;
  return p;
}

void write_design_notes(const fs::path& path, const DesignMetadata& m) {
  csv::Writer w(path);
  w.line("kind", "detail", "value");
  w.line("quantile_rule", m.quantile_rule, "");
  w.line("excluded_students", "", m.excluded_students);
  w.line("absorbed_blocks", "", m.absorbed_blocks);
  for (const auto& d : m.dropped_columns) w.line("dropped_column", d, "");
  for (const auto& s : m.warnings) w.line("warning", s, "");
  for (const auto& [district, cuts] : m.district_cuts)
    for (std::size_t j = 0; j < cuts.size(); ++j)
      w.line("district_cut", "district " + std::to_string(district) + " cut " + std::to_string(j + 1), cuts[j]);
}

}  // namespace

void write_manifest(const RunConfig& c, const std::string& command, const std::vector<std::string>& outputs,
                    const json& status) {
  const json config = c.to_json();
  json m;
  m["tool"] = "tcr";
  m["version"] = kVersion;
  m["command"] = command;
  m["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  m["config"] = config;
  m["config_hash"] = "fnv1a64:" + fnv1a_hex(config.dump());
  json modules;
  for (const char* name : {"matchcore", "synth", "design", "estimator", "diagnostics", "realloc", "inference", "cli"})
    modules[name] = kVersion;
  m["modules"] = modules;
  auto files = outputs;
  std::sort(files.begin(), files.end());
  m["outputs"] = files;
  m["status"] = status;
  std::ofstream out(c.out / "manifest.json", std::ios::binary);
  if (!out) throw InvalidInput("cannot write manifest in " + c.out.string());
  out << m.dump(2) << '\n';
}

int cmd_synth(const RunConfig& c) {
  const auto pop = c.population_config();
  const auto params = c.production_params();
  const auto dir = prepare_out(c);
  const auto ds = generate(pop, params);
  export_dataset(ds, dir, c.oracle_columns);
  log(c, "synth: " + std::to_string(ds.students.size()) + " students, " + std::to_string(ds.teachers.size()) +
             " teachers, " + std::to_string(ds.blocks.size()) + " blocks");
  write_manifest(c, "synth", {"blocks.csv", "sections.csv", "teachers.csv", "students.csv"},
                 {{"students", ds.students.size()}, {"teachers", ds.teachers.size()}, {"blocks", ds.blocks.size()}});
  return kExitOk;
}

int cmd_estimate(const RunConfig& c) {
  const auto ds = load_data(c);
  const auto spec = c.category_spec();
  const auto dir = prepare_out(c);
  DesignOptions opt;
  opt.include_lambda = c.include_lambda;
  const auto design = absorb_blocks(build_design(ds, spec, opt));
  const auto ols = ols_fit(design);
  const auto tsls = tsls_fit(design);
  write_estimate_csv(dir / "estimates_ols.csv", ols);
  write_estimate_csv(dir / "estimates_2sls.csv", tsls);
  write_comparison_csv(dir / "estimates_table.csv", ols, tsls);
  write_first_stage_csv(dir / "first_stage.csv", first_stage_F(design));
  write_design_notes(dir / "design_notes.csv", design.meta);
  write_manifest(c, "estimate",
                 {"estimates_ols.csv", "estimates_2sls.csv", "estimates_table.csv", "first_stage.csv",
                  "design_notes.csv"},
                 {{"n_obs", tsls.n_obs}, {"clusters", tsls.n_clusters}, {"endogenous", design.endog_names.size()}});
  return kExitOk;
}

int cmd_diagnose(const RunConfig& c) {
  const auto ds = load_data(c);
  const auto spec = c.category_spec();
  const auto dir = prepare_out(c);
  DiagnosticOptions opt;
  opt.level = c.level;
  const auto reports = run_all_diagnostics(ds, spec, opt);
  write_diagnostics_csv(dir / "diagnostics.csv", reports);
  write_diagnostic_coefficients_csv(dir / "diagnostic_coefficients.csv", reports);
  json rejected = json::array();
  for (const auto& r : reports)
    if (r.reject) rejected.push_back(r.test + ":" + r.dependent);
  write_manifest(c, "diagnose", {"diagnostics.csv", "diagnostic_coefficients.csv"}, {{"rejected", rejected}});
  for (const auto& r : reports)
    if (r.skipped) std::cerr << "notice: " << r.test << " skipped: " << r.notice << '\n';
  if (!rejected.empty()) {
    std::cerr << "diagnostic alarm: " << rejected.size() << " test(s) reject at level " << c.level << '\n';
    return kExitAlarm;
  }
  return kExitOk;
}

int cmd_reallocate(const RunConfig& c) {
  const Pipeline pipeline(load_data(c), pipeline_config(c));
  const auto dir = prepare_out(c);
  const auto r = pipeline.run();
  write_estimate_csv(dir / "estimates_2sls.csv", r.estimate);
  write_plans_csv(dir / "plans.csv", r.table, r.report);
  write_effects_csv(dir / "effects.csv", r.report);
  write_assortativeness_csv(dir / "assortativeness.csv",
                            {{"status_quo", assortativeness_summary(r.table, r.report.status_quo)},
                             {"optimal", assortativeness_summary(r.table, r.report.optimal.level)},
                             {"worst", assortativeness_summary(r.table, r.report.worst.level)}});
  write_manifest(c, "reallocate", {"estimates_2sls.csv", "plans.csv", "effects.csv", "assortativeness.csv"},
                 {{"reassigned_fraction", r.report.reassigned_fraction},
                  {"optimal_tie", r.report.optimal.degenerate_tie},
                  {"worst_tie", r.report.worst.degenerate_tie}});
  return kExitOk;
}

int cmd_bootstrap(const RunConfig& c) {
  const auto seed = c.require_seed("bootstrap");
  const Pipeline pipeline(load_data(c), pipeline_config(c));
  const auto dir = prepare_out(c);

  const auto all = pipeline.statistic_names();
  std::vector<std::size_t> pick;
  if (c.statistics.empty()) {
    for (std::size_t i = 0; i < all.size(); ++i) pick.push_back(i);
  } else {
    for (const auto& name : c.statistics) {
      const auto it = std::find(all.begin(), all.end(), name);
      if (it == all.end()) throw InvalidInput("unknown statistic '" + name + "'");
      pick.push_back(static_cast<std::size_t>(it - all.begin()));
    }
  }
  std::vector<std::string> names;
  for (auto i : pick) names.push_back(all[i]);

  BootstrapConfig bc;
  bc.replications = c.replications;
  bc.seed = seed;
  bc.threads = c.threads;
  const auto result = bootstrap_run(
      pipeline.cluster_count(), names,
      [&](std::span<const double> w) {
        const auto v = pipeline.statistics(pipeline.run(w));
        std::vector<double> out;
        for (auto i : pick) out.push_back(v[i]);
        return out;
      },
      bc);
  const auto summary = summarize(result);
  write_posterior_csv(dir / "posterior.csv", summary);
  std::vector<std::string> outputs{"posterior.csv", "skipped.csv"};
  if (c.write_draws) {
    write_draws_csv(dir / "draws.csv", result);
    outputs.push_back("draws.csv");
  }
  {
    csv::Writer w(dir / "skipped.csv");
    w.line("replication", "reason");
    for (std::size_t i = 0; i < result.skipped.size(); ++i) w.line(result.skipped[i], result.skip_reasons[i]);
  }
  const bool low_b = c.replications < kLowReplicationCount;
  write_manifest(c, "bootstrap", outputs,
                 {{"replications", c.replications},
                  {"skipped", result.skipped.size()},
                  {"alarm", result.alarm},
                  {"low_b", low_b}});
  if (low_b) std::cerr << "notice: " << c.replications << " replications; summaries are flagged low_b\n";
  if (result.alarm) {
    std::cerr << "bootstrap alarm: " << result.skipped.size() << " of " << c.replications
              << " replications skipped\n";
    return kExitAlarm;
  }
  return kExitOk;
}

int cmd_benchmark_vam(const RunConfig& c) {
  const auto dir = prepare_out(c);
  std::vector<std::pair<std::string, VamPolicy>> cases;
  if (c.vam) {
    cases.emplace_back("configured", *c.vam);
  } else {
    cases.emplace_back("bottom_5_to_average", VamPolicy{0.15, 0.05, std::nullopt});
    cases.emplace_back("bottom_10_to_average", VamPolicy{0.15, 0.10, std::nullopt});
    cases.emplace_back("bottom_5_to_q75", VamPolicy{0.15, 0.05, 0.75});
  }
  {
    csv::Writer w(dir / "vam_benchmark.csv");
    w.line("case", "sigma", "tau", "tau_tilde", "effect");
    for (const auto& [name, p] : cases)
      w.line(name, p.sigma, p.tau, p.tau_tilde ? *p.tau_tilde : std::nan(""), vam_benchmark(p));
  }
  {
    csv::Writer w(dir / "vam_sweep.csv");
    w.line("sigma", "tau", "tau_tilde", "effect");
    const double sigma = cases.front().second.sigma;
    const auto tilde = cases.front().second.tau_tilde;
    for (int i = 1; i <= 50; ++i) {
      VamPolicy p{sigma, i / 100.0, tilde};
      w.line(p.sigma, p.tau, tilde ? *tilde : std::nan(""), vam_benchmark(p));
    }
  }
  write_manifest(c, "benchmark-vam", {"vam_benchmark.csv", "vam_sweep.csv"});
  return kExitOk;
}

int cmd_toy_are(const RunConfig& c) {
  using namespace matchcore;
  const auto dir = prepare_out(c);
  const auto pop = two_type_example();
  const auto density = own_peer_density(pop);
  const auto seats = seat_rows(pop);
  const std::vector<std::vector<Rational>> counterfactual{
      {Rational(2, 3), Rational(1, 3)}, {Rational(1, 2), Rational(1, 2)},
      {Rational(1, 2), Rational(1, 2)}, {Rational(1, 3), Rational(2, 3)}};
  const std::vector<std::vector<Rational>> status_quo(pop.compositions.size(), pop.teacher_marginal);

  {
    csv::Writer w(dir / "toy_density.csv");
    w.line("classroom_type", "seat", "status_quo_p1", "counterfactual_p1", "x", "xbar", "f", "f_decimal");
    std::vector<int> seat_in(pop.compositions.size(), 0);
    for (const auto& row : seats) {
      std::string type;
      for (int t : pop.compositions[row.composition].student_types) type += std::to_string(t);
      w.line(type, seat_in[row.composition]++, to_string(status_quo[row.composition][1]),
             to_string(counterfactual[row.composition][1]), row.point.own, to_string(row.point.peer.at(0)),
             to_string(row.density), to_double(row.density));
    }
  }
  {
    csv::Writer w(dir / "toy_support.csv");
    w.line("x", "xbar", "f");
    for (std::size_t i = 0; i < density.support.size(); ++i)
      w.line(density.support[i].own, to_string(density.support[i].peer.at(0)), to_string(density.mass[i]));
  }
  const auto sq_rule = rule_from_classroom_probabilities(pop, density, status_quo);
  const auto cf_rule = rule_from_classroom_probabilities(pop, density, counterfactual);
  {
    csv::Writer w(dir / "toy_feasibility.csv");
    w.line("rule", "feasible", "max_violation", "classroom_consistent");
    for (const auto& [name, rule] : {std::pair{"status_quo", &sq_rule}, std::pair{"counterfactual", &cf_rule}}) {
      const auto f = check_feasible(*rule, density, pop.teacher_marginal);
      w.line(name, f.feasible, to_string(f.max_violation), is_classroom_consistent(*rule, pop, density));
    }
  }
  {
    csv::Writer w(dir / "toy_are.csv");
    w.line("surface", "status_quo_value", "counterfactual_value", "are", "best_plan", "best_value",
           "best_are", "enumerated_best_value");
    const std::vector<std::pair<std::string, MatchSurface::Function>> surfaces{
        {"separable", [](int x, const std::vector<double>& p, int l) { return x + p[0] + l; }},
        {"own_by_teacher", [](int x, const std::vector<double>&, int l) { return double(x * l); }},
        {"peer_by_teacher", [](int, const std::vector<double>& p, int l) { return p[0] * l; }}};
    for (const auto& [name, fn] : surfaces) {
      const MatchSurface m(density, pop.teacher_levels(), fn);
      const double sq = are_nonparametric(m, sq_rule, density);
      const double cf = are_nonparametric(m, cf_rule, density);
      const auto best = best_classroom_plan(pop, m, true);
      double enumerated = -1e300;
      // Seat-by-seat average, independent of the density/rule machinery.
      for (const auto& plan : feasible_classroom_plans(pop)) {
        double v = 0.0;
        for (std::size_t k = 0; k < pop.compositions.size(); ++k) {
          const auto& types = pop.compositions[k].student_types;
          for (std::size_t i = 0; i < types.size(); ++i) {
            std::vector<double> peer(static_cast<std::size_t>(pop.student_types - 1), 0.0);
            for (std::size_t j = 0; j < types.size(); ++j)
              if (j != i && types[j] > 0) peer[static_cast<std::size_t>(types[j] - 1)] += 1.0 / double(types.size() - 1);
            v += to_double(pop.compositions[k].probability) * fn(types[i], peer, plan[k]) / double(types.size());
          }
        }
        enumerated = std::max(enumerated, v);
      }
      std::string plan;
      for (int l : best.levels) plan += std::to_string(l);
      w.line(name, sq, cf, cf - sq, plan, best.value, best.value - sq, enumerated);
    }
  }
  write_manifest(c, "toy-are", {"toy_density.csv", "toy_support.csv", "toy_feasibility.csv", "toy_are.csv"});
  return kExitOk;
}

int dispatch(const std::string& command, const RunConfig& c) {
  if (command == "synth") return cmd_synth(c);
  if (command == "estimate") return cmd_estimate(c);
  if (command == "diagnose") return cmd_diagnose(c);
  if (command == "reallocate") return cmd_reallocate(c);
  if (command == "bootstrap") return cmd_bootstrap(c);
  if (command == "benchmark-vam") return cmd_benchmark_vam(c);
  if (command == "toy-are") return cmd_toy_are(c);
  throw InvalidInput("unknown subcommand '" + command + "'");
}

}  // namespace tcr::cli
