#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "dmo/config.hpp"
#include "dmo/errors.hpp"
#include "dmo/runner.hpp"

namespace {

int run_command(const std::string& config_path, const dmo::RunOptions& opts) {
  dmo::Config cfg = dmo::Config::parse_file(config_path);
  dmo::RunResult res = dmo::run_experiment(cfg, opts);
  for (const std::string& path : res.outputs)
    std::printf("wrote %s\n", path.c_str());
  if (opts.check) {
    if (!res.check_ok) {
      for (const std::string& f : res.failures)
        std::fprintf(stderr, "check failed: %s\n", f.c_str());
      return 4;
    }
    std::printf("checks passed\n");
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical experiments for elliptic operators with Dini-type "
               "coefficient oscillation"};
  app.require_subcommand(1);

  std::string config_path;
  dmo::RunOptions opts;
  CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "path to the config file")->required();
  run->add_option("--output-dir", opts.output_dir, "directory for result files");
  run->add_option("--threads", opts.threads, "worker thread budget (0 = all cores)");
  run->add_option("--seed", opts.seed, "override the config seed");
  run->add_flag("--check", opts.check, "evaluate the experiment's sanity assertions");

  CLI::App* list = app.add_subcommand("list", "print the experiment and parameter catalog");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      std::fputs(dmo::list_catalog().c_str(), stdout);
      return 0;
    }
    return run_command(config_path, opts);
  } catch (const dmo::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const dmo::SolverDiverged& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const dmo::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
