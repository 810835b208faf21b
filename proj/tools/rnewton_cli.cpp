// rnewton: command-line driver for the randomized Newton solver.
//
// Exit status: 0 converged, 2 not converged, 1 bad configuration or
// invalid problem setup.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <thread>

#include "commands.hpp"

namespace {

using rnewton::cli::RunConfig;
using rnewton::cli::RunLog;
using rnewton::cli::RunOptions;
using Command = int (*)(const RunConfig&, const RunOptions&, RunLog&);

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
  unsigned jobs = 0;
};

void add_common(CLI::App& sub, Common& c) {
  sub.add_option("--config", c.config, "YAML run configuration")->required()->check(CLI::ExistingFile);
  sub.add_option("--seed", c.seed, "override the master seed");
  sub.add_option("--out", c.out, "output directory (overrides the config)");
  sub.add_flag("--quiet", c.quiet, "only write run.log, no console progress");
  sub.add_option("--jobs", c.jobs, "worker threads for independent runs (default: hardware concurrency)");
}

int run(const Common& c, Command cmd) {
  try {
    RunConfig cfg = rnewton::cli::load_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (!c.out.empty()) cfg.output = c.out;
    std::filesystem::create_directories(cfg.output);
    RunOptions opt;
    opt.quiet = c.quiet;
    opt.jobs = c.jobs ? c.jobs : std::max(1u, std::thread::hardware_concurrency());
    RunLog log(cfg.output / "run.log", c.quiet);
    log("config " + std::filesystem::absolute(c.config).string() + ", seed " + std::to_string(cfg.seed));
    const int status = cmd(cfg, opt, log);
    log(status == 0 ? "status: converged" : "status: not converged");
    return status;
  } catch (const rnewton::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized Newton solver for neural-network PDE discretizations"};
  app.require_subcommand(1);

  struct Entry {
    const char* name;
    const char* help;
    Command cmd;
  };
  const Entry entries[] = {
      {"solve", "solve one problem, or a sweep of grid steps and widths", rnewton::cli::cmd_solve},
      {"track", "follow solutions across a parameter schedule", rnewton::cli::cmd_track},
      {"multistart", "run many initializations and cluster the converged patterns", rnewton::cli::cmd_multistart},
      {"demo-collocation", "one-node collocation example with spurious solutions",
       rnewton::cli::cmd_demo_collocation},
      {"diagnose", "expectation and covariance diagnostics on a random affine system", rnewton::cli::cmd_diagnose},
      {"reference", "sample the reference solution of a problem", rnewton::cli::cmd_reference},
  };
  std::vector<Common> common(std::size(entries));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(entries); ++i) {
    subs.push_back(app.add_subcommand(entries[i].name, entries[i].help));
    add_common(*subs.back(), common[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) return run(common[i], entries[i].cmd);
  }
  return 1;
}
