// Command-line driver: one experiment per invocation.
#include <iostream>

#include "CLI11.hpp"
#include "pdquad/runner.hpp"
#include "pdquad/simd.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Meshfree peridynamics quadrature experiments"};
  std::string config_path;
  std::string out_dir;
  std::string recheck_dir;
  unsigned threads = 1;
  bool full = false;
  bool quiet = false;
  auto* cfg = app.add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));
  app.add_flag("--full", full, "allow fine-scale configs");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* rc = app.add_option("--recheck", recheck_dir, "re-derive the verdict of a finished run directory")
                 ->check(CLI::ExistingDirectory);
  app.add_flag("--quiet", quiet, "only print the verdict line");
  cfg->excludes(rc);
  rc->excludes(cfg);
  CLI11_PARSE(app, argc, argv);

  try {
    if (!recheck_dir.empty()) {
      const pdq::RunConfig config = pdq::load_config(std::filesystem::path(recheck_dir) / "config.json");
      const pdq::RunOutcome outcome = pdq::recheck(recheck_dir);
      std::cout << pdq::verdict_line(config, outcome) << '\n';
      return outcome.pass ? 0 : 1;
    }
    if (config_path.empty()) {
      std::cerr << "either --config or --recheck is required\n" << app.help();
      return 2;
    }
    const pdq::RunConfig config = pdq::load_config(config_path);
    pdq::RunContext ctx;
    ctx.exec.threads = threads;
    ctx.full = full;
    ctx.out = out_dir;
    if (!quiet) {
      ctx.log = &std::clog;
      std::clog << "kernels: " << (pdq::simd::kernels().isa == pdq::simd::Isa::avx2 ? "avx2" : "scalar")
                << ", threads: " << threads << '\n';
    }
    const pdq::RunOutcome outcome = pdq::run_experiment(config, ctx);
    std::cout << pdq::verdict_line(config, outcome) << '\n';
    if (outcome.skipped) return 3;
    return outcome.pass ? 0 : 1;
  } catch (const pdq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
