#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fheston/cli/commands.hpp"
#include "fheston/cli/config.hpp"

using namespace fheston::cli;

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  std::optional<std::size_t> paths;
  std::optional<std::size_t> estimates;
  std::optional<std::string> payoff;
  std::optional<double> strike;
  std::optional<double> scale;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::string> estimator;
};

void add_flags(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_path, "JSON run configuration");
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--n", o.n, "grid size (price; tables use only this size)");
  app.add_option("--paths", o.paths, "paths per estimate");
  app.add_option("--estimates", o.estimates, "number of estimates");
  app.add_option("--payoff", o.payoff, "call, indicator or staircase");
  app.add_option("--strike", o.strike, "call strike");
  app.add_option("--scale", o.scale, "multiplier on the estimate count (tables)");
  app.add_option("--out", o.out, "output directory for CSV files");
  app.add_option("--threads", o.threads, "worker threads (default: FHESTON_THREADS or all cores)");
  app.add_option("--estimator", o.estimator, "naive, smoothed or both");
}

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
  if (o.seed) c.seed = *o.seed;
  if (o.n) {
    c.n = *o.n;
    c.grid_sizes = {*o.n};
  }
  if (o.paths) c.paths = *o.paths;
  if (o.estimates) c.estimates = *o.estimates;
  if (o.payoff) c.payoff = payoff_from_name(*o.payoff, o.strike.value_or(1.0));
  else if (o.strike) c.payoff = fheston::PayoffSpec::call(*o.strike);
  if (o.scale) c.scale = *o.scale;
  if (o.out) {
    c.out_dir = *o.out;
    c.write_estimates = true;
  }
  if (o.threads) c.threads = *o.threads;
  if (o.estimator) c.estimator = fheston::estimator_from_string(*o.estimator);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo pricing under a fractional Heston-type model"};
  app.require_subcommand(1);
  Overrides o;
  add_flags(app, o);
  app.fallthrough();
  auto* price = app.add_subcommand("price", "run one experiment and print its summary");
  auto* tables = app.add_subcommand("tables", "three payoffs x grid sizes, written as CSV");
  auto* validate = app.add_subcommand("validate", "driver and assumption checks");
  auto* converge = app.add_subcommand("converge", "coupled-ladder convergence study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  return run_guarded(
      [&] {
        const RunConfig config = build_config(o);
        if (price->parsed()) return cmd_price(config, std::cout, std::cerr);
        if (tables->parsed()) return cmd_tables(config, std::cout, std::cerr);
        if (validate->parsed()) return cmd_validate(config, std::cout, std::cerr);
        if (converge->parsed()) return cmd_converge(config, std::cout, std::cerr);
        return static_cast<int>(kUsage);
      },
      std::cerr);
}
