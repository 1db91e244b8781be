#include "faacaf/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "faacaf/io.hpp"
#include "json.hpp"

namespace faacaf {

namespace {
using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object())
    throw ConfigError("config section '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in '" + where + "'");
}

double get_number(const json& obj, const std::string& where,
                  const std::string& key) {
  if (!obj.contains(key))
    throw ConfigError("missing key '" + key + "' in '" + where + "'");
  if (!obj[key].is_number())
    throw ConfigError("key '" + key + "' in '" + where +
                      "' must be a number");
  return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& where,
                     const std::string& key, double fallback) {
  return obj.contains(key) ? get_number(obj, where, key) : fallback;
}

Vec3 get_vec3(const json& obj, const std::string& where,
              const std::string& key) {
  if (!obj.contains(key) || !obj[key].is_array() || obj[key].size() != 3)
    throw ConfigError("key '" + key + "' in '" + where +
                      "' must be a 3-element array");
  return {obj[key][0].get<double>(), obj[key][1].get<double>(),
          obj[key][2].get<double>()};
}

RippleProfile parse_ripple(const json& obj, const std::string& where) {
  require_keys(obj, where,
               {"peak_db", "amp1", "amp2", "period1_hz", "period2_hz",
                "phase1", "phase2"});
  RippleProfile r;
  r.peak_db = get_number_or(obj, where, "peak_db", 0.0);
  r.amp1 = get_number_or(obj, where, "amp1", 1.0);
  r.amp2 = get_number_or(obj, where, "amp2", 0.0);
  r.period1_hz = get_number_or(obj, where, "period1_hz", 1e9);
  r.period2_hz = get_number_or(obj, where, "period2_hz", 1e9);
  r.phase1 = get_number_or(obj, where, "phase1", 0.0);
  r.phase2 = get_number_or(obj, where, "phase2", 0.0);
  return r;
}
}  // namespace

ChirpSchedule Scenario::make_schedule() const {
  std::vector<Subband> subbands;
  for (const ClipOnModule& m : fabric.modules) subbands.push_back(m.passband);
  return build_schedule(band, subbands, schedule_params.num_states,
                        schedule_params.bandwidth_hz,
                        schedule_params.t_chirp_s,
                        schedule_params.guard_time_s,
                        schedule_params.evolutions,
                        schedule_params.sample_rate_hz);
}

CalibContext Scenario::make_calib_context(
    const ChirpSchedule& schedule) const {
  CalibContext ctx;
  ctx.schedule = schedule;
  ctx.schedule.evolutions = 1;
  ctx.schedule.chirps.resize(schedule.num_states);
  ctx.fabric = fabric;
  ctx.references = references;
  ctx.noise = noise;
  ctx.window = processing.window;
  ctx.zero_pad = processing.zero_pad;
  return ctx;
}

Scenario scenario_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }

  require_keys(root, "config",
               {"schema_version", "band", "schedule", "fabric",
                "truth_perturbation", "scene", "references", "noise", "grid",
                "processing", "budget", "calibrate", "seed"});

  Scenario s;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(
                    fnv1a64(text.data(), text.size())));
  s.config_hash = hash;

  if (!root.contains("schema_version"))
    throw ConfigError("missing key 'schema_version' in 'config'");
  s.schema_version = root["schema_version"].get<int>();
  if (s.schema_version != 1)
    throw ConfigError("unsupported schema_version");

  if (root.contains("band")) {
    const json& b = root["band"];
    require_keys(b, "band", {"f_lo_hz", "f_hi_hz"});
    s.band = {get_number(b, "band", "f_lo_hz"),
              get_number(b, "band", "f_hi_hz")};
    s.band.validate();
  }

  if (root.contains("schedule")) {
    const json& sc = root["schedule"];
    require_keys(sc, "schedule",
                 {"num_states", "bandwidth_hz", "t_chirp_s", "guard_time_s",
                  "evolutions", "sample_rate_hz", "guard_band_hz"});
    ScheduleParams& p = s.schedule_params;
    p.num_states =
        static_cast<int>(get_number_or(sc, "schedule", "num_states", 64));
    p.bandwidth_hz = get_number_or(sc, "schedule", "bandwidth_hz", 80e6);
    p.t_chirp_s = get_number_or(sc, "schedule", "t_chirp_s", 40e-6);
    p.guard_time_s = get_number_or(sc, "schedule", "guard_time_s", 200e-9);
    p.evolutions =
        static_cast<int>(get_number_or(sc, "schedule", "evolutions", 16));
    p.sample_rate_hz = get_number_or(sc, "schedule", "sample_rate_hz", 2e6);
    p.guard_band_hz = get_number_or(sc, "schedule", "guard_band_hz", 0.0);
  }

  if (!root.contains("fabric"))
    throw ConfigError("missing key 'fabric' in 'config'");
  {
    const json& f = root["fabric"];
    require_keys(f, "fabric", {"trunk_feed_origin", "modules"});
    if (f.contains("trunk_feed_origin"))
      s.fabric.trunk_feed_origin =
          get_vec3(f, "fabric", "trunk_feed_origin");
    if (!f.contains("modules") || !f["modules"].is_array() ||
        f["modules"].empty())
      throw ConfigError("'fabric.modules' must be a non-empty array");

    bool any_explicit_passband = false;
    int id = 0;
    for (const json& mj : f["modules"]) {
      const std::string where = "fabric.modules[" + std::to_string(id) + "]";
      require_keys(mj, where,
                   {"anchor", "axis", "aperture_length_m", "passband",
                    "losses"});
      ClipOnModule mod;
      mod.id = id;
      mod.anchor = get_vec3(mj, where, "anchor");
      mod.axis = get_vec3(mj, where, "axis");
      mod.aperture_length_m = get_number(mj, where, "aperture_length_m");
      if (mj.contains("passband")) {
        const json& pb = mj["passband"];
        require_keys(pb, where + ".passband", {"f_lo_hz", "f_hi_hz"});
        mod.passband = {id, get_number(pb, where + ".passband", "f_lo_hz"),
                        get_number(pb, where + ".passband", "f_hi_hz")};
        any_explicit_passband = true;
      }
      if (mj.contains("losses")) {
        const json& lj = mj["losses"];
        require_keys(lj, where + ".losses",
                     {"coupling_db", "guided_wave_db", "insertion_db",
                      "ripple"});
        mod.losses.coupling_db =
            get_number_or(lj, where + ".losses", "coupling_db", 0.0);
        mod.losses.guided_wave_db =
            get_number_or(lj, where + ".losses", "guided_wave_db", 0.0);
        mod.losses.insertion_db =
            get_number_or(lj, where + ".losses", "insertion_db", 0.0);
        if (lj.contains("ripple"))
          mod.losses.ripple =
              parse_ripple(lj["ripple"], where + ".losses.ripple");
      }
      s.fabric.modules.push_back(mod);
      ++id;
    }
    if (!any_explicit_passband) {
      const std::vector<Subband> subbands = assign_subbands(
          s.band, static_cast<int>(s.fabric.modules.size()),
          s.schedule_params.guard_band_hz);
      for (std::size_t k = 0; k < s.fabric.modules.size(); ++k)
        s.fabric.modules[k].passband = subbands[k];
    }
    s.fabric.validate();
  }

  if (root.contains("truth_perturbation")) {
    const json& t = root["truth_perturbation"];
    require_keys(t, "truth_perturbation",
                 {"delay_offset_s", "gain_tilt_db", "module_offsets"});
    s.truth.delay_offset_s =
        get_number_or(t, "truth_perturbation", "delay_offset_s", 0.0);
    s.truth.gain_tilt_db =
        get_number_or(t, "truth_perturbation", "gain_tilt_db", 0.0);
    if (t.contains("module_offsets")) {
      if (!t["module_offsets"].is_array())
        throw ConfigError("'truth_perturbation.module_offsets' must be an "
                          "array");
      for (const json& off : t["module_offsets"]) {
        if (!off.is_array() || off.size() != 3)
          throw ConfigError(
              "'truth_perturbation.module_offsets' entries must be "
              "3-element arrays");
        s.truth.module_offsets.push_back(
            {off[0].get<double>(), off[1].get<double>(),
             off[2].get<double>()});
      }
    }
    s.truth.validate(s.fabric.modules.size());
  }

  if (root.contains("scene")) {
    if (!root["scene"].is_array())
      throw ConfigError("'scene' must be an array");
    int i = 0;
    for (const json& tj : root["scene"]) {
      const std::string where = "scene[" + std::to_string(i++) + "]";
      require_keys(tj, where,
                   {"position", "rcs_m2", "radial_velocity_mps"});
      Target target;
      target.position = get_vec3(tj, where, "position");
      target.rcs_m2 = get_number_or(tj, where, "rcs_m2", 1.0);
      if (target.rcs_m2 <= 0.0)
        throw ConfigError("target RCS must be > 0 in " + where);
      target.radial_velocity_mps =
          get_number_or(tj, where, "radial_velocity_mps", 0.0);
      s.scene.push_back(target);
    }
  }

  if (root.contains("references")) {
    if (!root["references"].is_array())
      throw ConfigError("'references' must be an array");
    int i = 0;
    for (const json& rj : root["references"]) {
      const std::string where = "references[" + std::to_string(i) + "]";
      require_keys(rj, where, {"position", "rcs_m2"});
      ReferenceScatterer ref;
      ref.id = i++;
      ref.position = get_vec3(rj, where, "position");
      ref.rcs_m2 = get_number_or(rj, where, "rcs_m2", 1.0);
      s.references.push_back(ref);
    }
    for (const ReferenceScatterer& ref : s.references)
      for (const Target& target : s.scene)
        if ((ref.position - target.position).norm() < 1e-9)
          throw ConfigError(
              "references must be distinct from scene targets");
  }

  if (root.contains("noise")) {
    const json& n = root["noise"];
    require_keys(n, "noise",
                 {"reference_snr_db", "reference_range_m", "seed",
                  "enabled"});
    s.noise.reference_snr_db =
        get_number_or(n, "noise", "reference_snr_db", 20.0);
    s.noise.reference_range_m =
        get_number_or(n, "noise", "reference_range_m", 3.0);
    if (s.noise.reference_range_m <= 0.0)
      throw ConfigError("noise reference range must be > 0");
    if (n.contains("seed")) s.noise.seed = n["seed"].get<std::uint64_t>();
    if (n.contains("enabled")) s.noise.enabled = n["enabled"].get<bool>();
  }
  if (root.contains("seed")) s.noise.seed = root["seed"].get<std::uint64_t>();

  if (root.contains("grid")) {
    const json& g = root["grid"];
    require_keys(g, "grid",
                 {"origin", "axis_u", "axis_v", "extent_u_m", "extent_v_m",
                  "spacing_m"});
    s.grid.present = true;
    s.grid.origin = get_vec3(g, "grid", "origin");
    s.grid.axis_u = get_vec3(g, "grid", "axis_u");
    s.grid.axis_v = get_vec3(g, "grid", "axis_v");
    s.grid.extent_u_m = get_number(g, "grid", "extent_u_m");
    s.grid.extent_v_m = get_number(g, "grid", "extent_v_m");
    s.grid.spacing_m = get_number(g, "grid", "spacing_m");
    s.grid.make();  // validates
  }

  if (root.contains("processing")) {
    const json& p = root["processing"];
    require_keys(p, "processing",
                 {"window", "zero_pad", "snr_threshold_db", "r_max_m",
                  "t_ringing_s", "t_multipath_s"});
    if (p.contains("window"))
      s.processing.window = window_from_name(p["window"].get<std::string>());
    s.processing.zero_pad =
        static_cast<int>(get_number_or(p, "processing", "zero_pad", 4));
    s.processing.snr_threshold_db =
        get_number_or(p, "processing", "snr_threshold_db", 10.0);
    s.processing.r_max_m = get_number_or(p, "processing", "r_max_m", 5.0);
    s.processing.t_ringing_s =
        get_number_or(p, "processing", "t_ringing_s", 0.0);
    s.processing.t_multipath_s =
        get_number_or(p, "processing", "t_multipath_s", 0.0);
  }

  if (root.contains("budget")) {
    const json& b = root["budget"];
    require_keys(b, "budget",
                 {"coupling_db", "guided_wave_db", "insertion_db",
                  "ripple_db", "baseline_snr_db", "reference_range_m",
                  "baseline_max_range_m", "num_states", "threshold_db",
                  "use_bundled_ripple_fixture"});
    BudgetInput& in = s.budget.input;
    in.coupling_db = get_number_or(b, "budget", "coupling_db", 4.0);
    in.guided_wave_db = get_number_or(b, "budget", "guided_wave_db", 1.0);
    in.insertion_db = get_number_or(b, "budget", "insertion_db", 2.0);
    in.ripple_db = get_number_or(b, "budget", "ripple_db", 1.0);
    in.baseline_snr_db =
        get_number_or(b, "budget", "baseline_snr_db", 20.0);
    in.reference_range_m =
        get_number_or(b, "budget", "reference_range_m", 3.0);
    in.baseline_max_range_m =
        get_number_or(b, "budget", "baseline_max_range_m", 5.0);
    in.num_states =
        static_cast<int>(get_number_or(b, "budget", "num_states", 64));
    in.threshold_db = get_number_or(b, "budget", "threshold_db", 10.0);
    if (b.contains("use_bundled_ripple_fixture"))
      s.budget.use_bundled_ripple_fixture =
          b["use_bundled_ripple_fixture"].get<bool>();
  }

  if (root.contains("calibrate")) s.calibrate = root["calibrate"].get<bool>();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_text(buffer.str());
}

E2EResult run_e2e(const Scenario& scenario, bool calibrate) {
  E2EResult result;
  result.schedule = scenario.make_schedule();
  result.guard_report = validate_guard_gaps(
      result.schedule, scenario.processing.guard_budget());
  if (!result.guard_report.passed)
    throw ValidationError("guard validation failed: " +
                          result.guard_report.message);

  result.cube = synthesize_beat(result.schedule, scenario.fabric,
                                scenario.truth, scenario.scene,
                                scenario.noise, scenario.processing.r_max_m);

  const int num_states = result.schedule.num_states;
  if (scenario.noise.enabled) {
    result.snr_db = state_snrs(result.cube, scenario.processing.window,
                               scenario.processing.zero_pad);
    result.usable =
        usable_states(result.snr_db, scenario.processing.snr_threshold_db);
  } else {
    result.snr_db.assign(num_states,
                         std::numeric_limits<double>::infinity());
    result.usable.threshold_db = scenario.processing.snr_threshold_db;
    for (int m = 0; m < num_states; ++m) result.usable.states.push_back(m);
  }
  if (result.usable.states.empty())
    throw RuntimeFailure("no usable frequency states above threshold");

  CalibParams theta = CalibParams::zero(scenario.fabric.modules.size());
  if (calibrate && !scenario.references.empty()) {
    const CalibContext ctx = scenario.make_calib_context(result.schedule);
    std::vector<Target> ref_targets;
    for (const ReferenceScatterer& r : scenario.references)
      ref_targets.push_back({r.position, r.rcs_m2, 0.0});
    const RawDataCube calib_cube =
        synthesize_beat(ctx.schedule, scenario.fabric, scenario.truth,
                        ref_targets, scenario.noise,
                        scenario.processing.r_max_m);
    const CalibMeasurement meas = measure_references(ctx, calib_cube);
    result.fit = fit_calibration(ctx, meas, CalibParams::zero(
                                                scenario.fabric.modules.size()));
    theta = result.fit.theta_hat;
    result.calibrated = true;
  }

  result.profiles.reserve(num_states);
  for (int m = 0; m < num_states; ++m) {
    RangeProfile p =
        range_profile(result.cube, m, 0, scenario.processing.window,
                      scenario.processing.zero_pad);
    p.noiseless = !scenario.noise.enabled;
    if (result.calibrated)
      p = normalize_state(p, theta, scenario.band);
    result.profiles.push_back(std::move(p));
  }

  if (scenario.grid.present && !scenario.scene.empty()) {
    const FabricConfig& fabric = scenario.fabric;
    PositionMap map;
    if (result.calibrated)
      map = [theta, &fabric](double f) {
        return calibrated_map(theta, fabric, f);
      };
    else
      map = [&fabric](double f) { return nominal_map(fabric, f); };
    result.image =
        focus(result.profiles, map, scenario.grid.make(), result.usable);
    result.metrics = image_metrics(result.image);
    result.has_image = true;
  }
  return result;
}

void write_e2e_outputs(const Scenario& scenario, const E2EResult& result,
                       const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  Manifest manifest(scenario.config_hash, scenario.noise.seed);

  auto emit = [&](const std::string& name, auto writer) {
    const fs::path path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    writer(out);
    out.close();
    manifest.add_file(path);
  };

  emit("schedule.csv",
       [&](std::ostream& o) { write_schedule_csv(result.schedule, o); });
  emit("guard_report.txt", [&](std::ostream& o) {
    o << result.guard_report.message << "\n";
  });
  emit("cube.bin",
       [&](std::ostream& o) { write_cube_binary(result.cube, o); });
  emit("cube.hdr",
       [&](std::ostream& o) { write_cube_header(result.cube, o); });
  emit("snr_table.csv", [&](std::ostream& o) {
    write_snr_table_csv(result.snr_db, result.schedule.state_frequencies(),
                        o);
  });
  emit("mapping.csv", [&](std::ostream& o) {
    write_mapping_csv(scenario.fabric, result.schedule.state_frequencies(),
                      o);
  });
  if (result.calibrated) {
    emit("fit_report.json",
         [&](std::ostream& o) { write_fit_report_json(result.fit, o); });
    emit("calibrated_mapping.csv", [&](std::ostream& o) {
      write_calibrated_mapping_csv(result.fit.theta_hat, scenario.fabric,
                                   result.schedule.state_frequencies(), o);
    });
  }
  if (result.has_image) {
    emit("image.csv",
         [&](std::ostream& o) { write_image_csv(result.image, o); });
    emit("image.pgm",
         [&](std::ostream& o) { write_image_pgm(result.image, o); });
    emit("metrics.json",
         [&](std::ostream& o) { write_metrics_json(result.metrics, o); });
  }
  manifest.write(out_dir / "manifest.json");
}

BudgetReport run_budget(const Scenario& scenario) {
  BudgetInput input = scenario.budget.input;
  if (scenario.budget.use_bundled_ripple_fixture)
    input.per_state_ripple_db = meff_fixture_state_ripple_db();
  return budget_report(input);
}

}  // namespace faacaf
