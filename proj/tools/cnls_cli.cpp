// cnls_cli: batch frontend for the coupled critical NLS library.
#include <CLI11.hpp>

#include "cnls/cli.hpp"

int main(int argc, char** argv) {
  cnls::cli::Command cmd;
  CLI::App app{"Least-energy quantities for k-coupled critical Schrodinger systems"};
  app.add_option("command", cmd.name, "amplitudes | dk-ladder | instanton | bn-solve | sync-solve | "
                                      "eps-sweep | pohozaev | beta-branch | full-report")
      ->required();
  app.add_option("--spec", cmd.spec_path, "JSON spec file")->required();
  app.add_option("--out", cmd.output_dir, "output directory (created if missing)");
  app.add_option("--set", cmd.overrides, "override a spec field, e.g. tolerances.grid_nodes=4000 (repeatable)");
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "seed for the random multi-starts");
  app.add_flag("--quiet", cmd.quiet, "no summary on stdout");
  app.add_option("--field", cmd.field_path, "pohozaev: evaluate this profiles.csv instead of solving");
  app.add_option("--beta-grid", cmd.beta_grid, "beta-branch: grid starting at 0")->delimiter(',');
  app.add_option("--eps", cmd.eps, "eps-sweep: regularization values")->delimiter(',');
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << cnls::cli::detail::error_json("usage", e.what(), cnls::cli::Exit::validation) << '\n';
    return cnls::cli::Exit::validation;
  }
  if (*seed_opt) cmd.seed = seed;
  return cnls::cli::run(cmd);
}
