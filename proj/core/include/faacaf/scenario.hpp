#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "faacaf/budget.hpp"
#include "faacaf/calibration.hpp"
#include "faacaf/imaging.hpp"

namespace faacaf {

struct ScheduleParams {
  int num_states = 64;
  double bandwidth_hz = 80e6;
  double t_chirp_s = 40e-6;
  double guard_time_s = 200e-9;
  int evolutions = 16;
  double sample_rate_hz = 2e6;
  double guard_band_hz = 0.0;
};

struct ProcessingParams {
  Window window = Window::kHann;
  int zero_pad = 4;
  double snr_threshold_db = 10.0;
  double r_max_m = 5.0;
  double t_ringing_s = 0.0;
  double t_multipath_s = 0.0;

  GuardBudget guard_budget() const {
    return {2.0 * r_max_m / kSpeedOfLight, t_ringing_s, t_multipath_s};
  }
};

struct GridParams {
  bool present = false;
  Vec3 origin;
  Vec3 axis_u{1.0, 0.0, 0.0};
  Vec3 axis_v{0.0, 1.0, 0.0};
  double extent_u_m = 1.0;
  double extent_v_m = 1.0;
  double spacing_m = 0.005;

  ImagingGrid make() const {
    return ImagingGrid::planar(origin, axis_u, axis_v, extent_u_m,
                               extent_v_m, spacing_m);
  }
};

struct BudgetParams {
  BudgetInput input;
  bool use_bundled_ripple_fixture = false;
};

/// One fully specified simulation run, loaded from a JSON config file.
/// Unknown keys anywhere in the file are errors.
struct Scenario {
  int schema_version = 1;
  Band band{60e9, 66e9};
  ScheduleParams schedule_params;
  FabricConfig fabric;
  PerturbationState truth;
  std::vector<Target> scene;
  std::vector<ReferenceScatterer> references;
  NoiseSpec noise;
  GridParams grid;
  ProcessingParams processing;
  BudgetParams budget;
  bool calibrate = true;
  std::string config_hash;

  ChirpSchedule make_schedule() const;
  CalibContext make_calib_context(const ChirpSchedule& schedule) const;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json_text(const std::string& text);

struct E2EResult {
  ChirpSchedule schedule;
  ValidationReport guard_report;
  RawDataCube cube;
  std::vector<RangeProfile> profiles;  // evolution 0; normalized if calibrated
  std::vector<double> snr_db;
  UsableSet usable;
  bool calibrated = false;
  FitReport fit;
  bool has_image = false;
  FocusedImage image;
  ImageMetrics metrics;
};

/// synthesize -> range profiles -> (optional) calibrate -> normalize ->
/// focus -> metrics. Throws ValidationError when guard validation fails.
E2EResult run_e2e(const Scenario& scenario, bool calibrate);

/// Write every artifact of a result under out_dir plus a manifest listing
/// each file with a content hash.
void write_e2e_outputs(const Scenario& scenario, const E2EResult& result,
                       const std::filesystem::path& out_dir);

BudgetReport run_budget(const Scenario& scenario);

}  // namespace faacaf
