#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "declab/config.hpp"
#include "declab/errors.hpp"
#include "declab/runner.hpp"

namespace {

// "model:NU", or any other text as the graph expression phi(t).
declab::CurveSpec parse_curve_flag(const std::string& text) {
  const std::string prefix = "model:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const double nu = std::stod(text.substr(prefix.size()), &used);
      if (used == text.size() - prefix.size()) return declab::CurveSpec::model(nu);
    } catch (const std::exception&) {
    }
    throw declab::ConfigError("--curve: cannot read nu from '" + text + "'");
  }
  return declab::CurveSpec::graph(text);
}

std::optional<int> env_workers() {
  const char* v = std::getenv("DECOUPLE_LAB_WORKERS");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used == std::string(v).size() && n >= 1) return n;
  } catch (const std::exception&) {
  }
  throw declab::ConfigError(std::string("DECOUPLE_LAB_WORKERS must be a positive integer, got '") + v + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on l2 decoupling for curves with degenerate curvature"};
  app.set_version_flag("--version", declab::version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  app.add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--workers", workers, "worker threads (overrides DECOUPLE_LAB_WORKERS and the config)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed (overrides search.seed)");
  app.add_flag("--quiet", quiet, "suppress progress output");

  app.add_subcommand("curve-info", "vanishing orders and the exponent r of each curve");
  app.add_subcommand("ratio", "decoupling ratios for random test functions");
  app.add_subcommand("scan", "extremizer search over deltas and a fitted exponent");
  app.add_subcommand("rescale-check", "Delta t_max margins of the rescaling step");
  app.add_subcommand("selftest", "closed-form sanity checks");
  CLI::App* expsum = app.add_subcommand("expsum", "l6 averages of exponential sums");
  std::string curve_flag, points_flag;
  std::vector<int> N_flag;
  std::optional<double> R_flag;
  expsum->add_option("--curve", curve_flag, "model:NU or an expression phi(t)");
  expsum->add_option("--N", N_flag, "numbers of terms")->delimiter(',');
  expsum->add_option("--points", points_flag, "lattice, random or perturbed")
      ->check(CLI::IsMember({"lattice", "random", "perturbed"}));
  expsum->add_option("--R", R_flag, "ball radius (default N^r)")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : declab::kExitConfig;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    declab::ExperimentConfig config;
    if (!config_path.empty()) config = declab::load_config(config_path);
    if (!out_dir.empty()) config.output.dir = out_dir;
    if (seed) config.search.seed = *seed;
    if (workers) {
      config.workers = *workers;
    } else if (const auto env = env_workers()) {
      config.workers = *env;
    }
    if (sub == "expsum") {
      if (!curve_flag.empty()) config.curves = {parse_curve_flag(curve_flag)};
      if (!N_flag.empty()) config.expsum.Ns = N_flag;
      if (!points_flag.empty()) config.expsum.points = points_flag;
      if (R_flag) config.expsum.R = *R_flag;
    }
    declab::RunOptions options;
    options.quiet = quiet;
    return declab::run(sub, config, options);
  } catch (const declab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return declab::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return declab::kExitFailure;
  }
}
