#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "commands.hpp"
#include "tcr/error.hpp"
#include "tcr/version.hpp"

namespace {

struct Flags {
  std::string config;
  std::uint64_t seed = 0;
  std::string out, data, cells;
  int k = 0, l = 0;
  std::vector<double> cutoffs;
  bool include_lambda = false;
  bool oracle_columns = false;
  std::size_t replications = 0;
  unsigned threads = 0;
  double sigma = 0, tau = 0, tau_tilde = 0;
  int verbosity = 0;
};

}  // namespace

int main(int argc, char** argv) {
  using namespace tcr::cli;
  CLI::App app{"Teacher-to-classroom reallocation toolkit"};
  app.set_version_flag("--version", tcr::kVersion);
  app.require_subcommand(1);
  Flags f;

  struct Opt {
    CLI::Option* ptr = nullptr;
    bool given() const { return ptr && ptr->count() > 0; }
  };
  Opt config, seed, out, data, k, l, cutoffs, cells, lambda, replications, oracle, threads, sigma, tau, tau_tilde;
  config.ptr = app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  seed.ptr = app.add_option("--seed", f.seed, "random seed");
  out.ptr = app.add_option("--out", f.out, "output directory");
  data.ptr = app.add_option("--data", f.data, "dataset directory");
  k.ptr = app.add_option("--k", f.k, "student types K");
  l.ptr = app.add_option("--l", f.l, "teacher levels L");
  cutoffs.ptr = app.add_option("--cutoffs", f.cutoffs, "teacher practice cutoffs (L-1 values)")->delimiter(',');
  cells.ptr = app.add_option("--cells", f.cells, "reallocation cells")
                  ->check(CLI::IsMember({"district-school-type", "school-type", "block"}));
  lambda.ptr = app.add_flag("--include-lambda", f.include_lambda, "include teacher-by-peer terms");
  replications.ptr = app.add_option("--replications", f.replications, "bootstrap replications");
  oracle.ptr = app.add_flag("--oracle-columns", f.oracle_columns, "export latent columns (synth)");
  threads.ptr = app.add_option("--threads", f.threads, "bootstrap worker threads");
  sigma.ptr = app.add_option("--sigma", f.sigma, "VAM standard deviation");
  tau.ptr = app.add_option("--tau", f.tau, "share of teachers replaced");
  tau_tilde.ptr = app.add_option("--tau-tilde", f.tau_tilde, "replacement quantile");
  app.add_flag("-v,--verbose", f.verbosity, "log progress to stderr");

  for (const char* name : {"synth", "estimate", "diagnose", "reallocate", "bootstrap", "benchmark-vam", "toy-are"})
    app.add_subcommand(name)->fallthrough();
  app.get_subcommand("synth")->description("generate a synthetic experiment");
  app.get_subcommand("estimate")->description("OLS and 2SLS fits with first-stage tests");
  app.get_subcommand("diagnose")->description("balance, non-compliance and peer restriction tests");
  app.get_subcommand("reallocate")->description("optimal and worst reallocations with average effects");
  app.get_subcommand("bootstrap")->description("Bayesian bootstrap posterior summaries");
  app.get_subcommand("benchmark-vam")->description("value-added replacement benchmarks");
  app.get_subcommand("toy-are")->description("two-type toy population and its reallocation effects");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    RunConfig c = config.given() ? RunConfig::load(f.config) : RunConfig{};
    if (seed.given()) c.seed = f.seed;
    if (out.given()) c.out = f.out;
    if (data.given()) c.data = f.data;
    if (k.given()) c.K = f.k;
    if (l.given()) c.L = f.l;
    if (cutoffs.given()) c.cutoffs = f.cutoffs;
    if (l.given() && !cutoffs.given() && static_cast<int>(c.cutoffs.size()) != c.L - 1) c.cutoffs.clear();
    if (cells.given()) c.cells = tcr::parse_cell_scheme(f.cells);
    if (lambda.given()) c.include_lambda = f.include_lambda;
    if (replications.given()) c.replications = f.replications;
    if (oracle.given()) c.oracle_columns = f.oracle_columns;
    if (threads.given()) c.threads = f.threads;
    if (tau_tilde.given() && !tau.given() && !c.vam) throw tcr::InvalidInput("--tau-tilde needs --tau");
    if (sigma.given() || tau.given() || tau_tilde.given()) {
      tcr::VamPolicy p = c.vam.value_or(tcr::VamPolicy{});
      if (sigma.given()) p.sigma = f.sigma;
      if (tau.given()) p.tau = f.tau;
      if (tau_tilde.given()) p.tau_tilde = f.tau_tilde;
      c.vam = p;
    }
    if (f.verbosity > 0) c.verbosity = f.verbosity;
    return dispatch(command, c);
  } catch (const tcr::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const tcr::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const tcr::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
