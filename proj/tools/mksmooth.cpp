// mksmooth: run a configured experiment and write raw/summary CSVs plus a JSON
// sidecar. Exit codes: 0 ok, 2 bad config, 3 anything else.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mks/config.hpp"
#include "mks/errors.hpp"
#include "mks/harness.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailure = 3;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw mks::Error(mks::Errc::io_error, "cannot read config '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel smoothing experiments on the circle and torus"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool quiet = false;

  // subcommand name → experiment kinds it accepts
  const std::vector<std::pair<std::string, std::vector<mks::ExperimentKind>>> commands = {
      {"simulate", {mks::ExperimentKind::berry_circle, mks::ExperimentKind::berry_torus}},
      {"rates", {mks::ExperimentKind::rates}},
      {"laplacian", {mks::ExperimentKind::laplacian}},
      {"hks", {mks::ExperimentKind::hks}},
      {"regression", {mks::ExperimentKind::regression}},
  };
  for (const auto& [name, _] : commands) {
    auto* sub = app.add_subcommand(name, "run a " + name + " experiment");
    sub->add_option("--config", config_path, "experiment config (INI)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override experiment.seed");
    sub->add_option("--out", out_dir, "output directory (default experiment.output)");
    sub->add_option("--threads", threads, "replicate worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", quiet, "no progress or advisories on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    std::vector<std::string> warnings;
    mks::ExperimentConfig cfg = mks::parse_config(read_file(config_path), &warnings);
    const auto& allowed = std::find_if(commands.begin(), commands.end(), [&](auto& c) { return c.first == sub; })->second;
    if (std::find(allowed.begin(), allowed.end(), cfg.kind) == allowed.end()) {
      std::cerr << "mksmooth: config kind '" << mks::experiment_name(cfg.kind) << "' does not belong to '" << sub
                << "'\n";
      return kExitConfig;
    }
    if (seed) cfg.seed = *seed;
    if (!out_dir.empty()) cfg.output = out_dir;
    if (!quiet)
      for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

    std::filesystem::create_directories(cfg.output);
    mks::RunOptions opts;
    opts.threads = threads;
    if (!quiet) opts.progress = [](const std::string& msg) { std::cerr << "  " << msg << '\n'; };
    const mks::ExperimentResult res = mks::run_experiment(cfg, opts);
    mks::write_results(res, cfg.output);
    if (!quiet) {
      for (const auto& a : res.advisories) std::cerr << "advisory: " << a << '\n';
      std::cerr << "wrote " << cfg.output << "/{raw.csv,summary.csv,result.json} in " << res.wall_seconds << " s\n";
    }
    if (!res.failure.empty()) {
      std::cerr << "mksmooth: " << res.failure << '\n';
      return kExitFailure;
    }
    return 0;
  } catch (const mks::Error& e) {
    std::cerr << "mksmooth: " << e.what() << '\n';
    return e.is_config_error() ? kExitConfig : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "mksmooth: " << e.what() << '\n';
    return kExitFailure;
  }
}
