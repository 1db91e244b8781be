// Batch front end: load a scenario config, run one of the pipeline flows,
// write artifacts under --out. Exit codes: 0 ok, 1 config error,
// 2 validation failure, 3 runtime failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "faacaf/io.hpp"
#include "faacaf/scenario.hpp"

namespace fs = std::filesystem;
using namespace faacaf;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool no_calibrate = false;
};

Scenario load(const Options& opt) {
  Scenario s = load_scenario(opt.config_path);
  if (opt.seed_set) s.noise.seed = opt.seed;
  return s;
}

int run_schedule(const Options& opt) {
  const Scenario s = load(opt);
  const ChirpSchedule schedule = s.make_schedule();
  const ValidationReport report =
      validate_guard_gaps(schedule, s.processing.guard_budget());

  fs::create_directories(opt.out_dir);
  {
    std::ofstream out(fs::path(opt.out_dir) / "schedule.csv");
    write_schedule_csv(schedule, out);
  }
  {
    std::ofstream out(fs::path(opt.out_dir) / "guard_report.txt");
    out << report.message << "\n";
  }
  std::cout << report.message << "\n";
  if (!report.passed) {
    std::cerr << "guard validation failed, margin " << report.margin_s
              << " s\n";
    return 2;
  }
  return 0;
}

enum class ImageMode { kOff, kRequired, kIfConfigured };

int run_pipeline(const Options& opt, bool calibrate, ImageMode mode) {
  Scenario s = load(opt);
  if (mode == ImageMode::kRequired && !s.grid.present)
    throw ConfigError("'grid' section required for imaging");
  if (mode == ImageMode::kOff) s.grid.present = false;

  const E2EResult result = run_e2e(s, calibrate && s.calibrate);
  write_e2e_outputs(s, result, opt.out_dir);

  std::cout << "usable states: " << result.usable.states.size() << " / "
            << result.schedule.num_states << "\n";
  if (result.calibrated)
    std::cout << "calibration "
              << (result.fit.converged ? "converged" : "did not converge")
              << " after " << result.fit.iterations << " iterations\n";
  if (result.has_image)
    std::cout << "peak |Z| " << result.metrics.peak_magnitude << " at ("
              << result.metrics.peak_position.x << ", "
              << result.metrics.peak_position.y << ", "
              << result.metrics.peak_position.z << ")\n";
  std::cout << "artifacts written to " << opt.out_dir << "\n";
  return 0;
}

int run_budget_cmd(const Options& opt) {
  const Scenario s = load(opt);
  const BudgetReport report = run_budget(s);
  write_budget_report(report, std::cout);
  fs::create_directories(opt.out_dir);
  {
    std::ofstream out(fs::path(opt.out_dir) / "budget.txt");
    write_budget_report(report, out);
  }
  {
    std::ofstream out(fs::path(opt.out_dir) / "budget.csv");
    write_budget_csv(report, out);
  }
  return 0;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "scenario config file")
      ->required();
  cmd->add_option("--out", opt.out_dir, "output directory");
  cmd->add_option("--seed", opt.seed, "override the config seed")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frequency-scanned near-field FMCW simulator"};
  app.require_subcommand(1);

  Options opt;
  CLI::App* schedule = app.add_subcommand(
      "schedule", "build and validate a chirp schedule");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "synthesize the raw data cube and SNR table");
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "run the reference-scatterer calibration fit");
  CLI::App* image = app.add_subcommand(
      "image", "focus the scene onto the configured grid");
  CLI::App* budget = app.add_subcommand(
      "budget", "evaluate the link budget");
  CLI::App* e2e = app.add_subcommand(
      "e2e", "full pipeline: simulate, calibrate, focus, report");
  for (CLI::App* cmd : {schedule, simulate, calibrate, image, budget, e2e})
    add_common(cmd, opt);
  for (CLI::App* cmd : {image, e2e})
    cmd->add_flag("--no-calibrate", opt.no_calibrate,
                  "skip the calibration pass");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (schedule->parsed()) return run_schedule(opt);
    if (simulate->parsed())
      return run_pipeline(opt, false, ImageMode::kOff);
    if (calibrate->parsed())
      return run_pipeline(opt, true, ImageMode::kOff);
    if (image->parsed())
      return run_pipeline(opt, !opt.no_calibrate, ImageMode::kRequired);
    if (budget->parsed()) return run_budget_cmd(opt);
    if (e2e->parsed())
      return run_pipeline(opt, !opt.no_calibrate, ImageMode::kIfConfigured);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
