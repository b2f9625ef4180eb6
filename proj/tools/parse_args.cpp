#include <CLI11.hpp>

#include "cli.hpp"

namespace cmvspec::cli {

int main_entry(int argc, char** argv) {
  CLI::App app{"Spectral experiments for electric quantum walks and skew-shift CMV matrices"};
  app.require_subcommand(1);

  RunOptions opts;
  std::string config;
  std::string out = ".";
  std::int64_t grid = 0;
  std::int64_t window = 0;
  std::int64_t block = 0;
  std::string omegas;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment config (JSON)");
    sub->add_option("--out", out, "Existing output directory");
    sub->add_option("--window", window, "Window size (overrides config)");
    sub->add_option("--block", block, "Compression size (overrides config)");
    sub->add_option("--threads", opts.threads, "Worker threads for grid certification");
    sub->add_flag("--exact", opts.exact, "Exact rational arithmetic for angles");
  };

  auto* verify = app.add_subcommand("verify", "Check gauge, identity, covariance or tau relations");
  verify->add_option("kind", opts.verify_kind, "gauge | identities | covariance | tau")
      ->required()
      ->check(CLI::IsMember({"gauge", "identities", "covariance", "tau"}));
  common(verify);
  auto* spectrum = app.add_subcommand("spectrum", "Eigenangles and gap statistics of a compression");
  common(spectrum);
  auto* certify = app.add_subcommand("certify", "Weyl sigma_min on an equispaced grid of the circle");
  common(certify);
  certify->add_option("--grid", grid, "Number of grid points (>= 8)");
  auto* sweep = app.add_subcommand("sweep", "Spectra for a list of rotation numbers");
  common(sweep);
  sweep->add_option("--omegas", omegas, "Comma-separated list: decimals, p/q or golden");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  opts.command = app.get_subcommands().front()->get_name();
  if (!config.empty()) opts.config_path = config;
  opts.out_dir = out;
  if (certify->count("--grid")) opts.grid = grid;
  if (app.get_subcommands().front()->count("--window")) opts.window = window;
  if (app.get_subcommands().front()->count("--block")) opts.block = block;
  if (sweep->count("--omegas")) opts.omegas = omegas;
  return run(opts);
}

}  // namespace cmvspec::cli
