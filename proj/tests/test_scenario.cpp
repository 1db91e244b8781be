#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "faacaf/io.hpp"
#include "faacaf/scenario.hpp"

using namespace faacaf;
namespace fs = std::filesystem;

namespace {

fs::path config_dir() {
  const char* dir = std::getenv("FAACAF_CONFIG_DIR");
  REQUIRE(dir != nullptr);
  return dir;
}

fs::path data_dir() {
  const char* dir = std::getenv("FAACAF_TEST_DATA");
  REQUIRE(dir != nullptr);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

TEST_CASE("scenario parsing accepts the shipped configs") {
  for (const char* name :
       {"nominal_noiseless.json", "perturbed.json", "worked_example.json"}) {
    const Scenario s = load_scenario(config_dir() / name);
    CHECK(s.schema_version == 1);
    CHECK_FALSE(s.fabric.modules.empty());
    CHECK_FALSE(s.config_hash.empty());
  }
}

TEST_CASE("scenario parsing rejects malformed input") {
  SUBCASE("unknown keys are errors, not warnings") {
    CHECK_THROWS_AS(load_scenario(data_dir() / "unknown_key.json"),
                    ConfigError);
  }

  SUBCASE("invalid JSON") {
    CHECK_THROWS_AS(scenario_from_json_text("{ not json"), ConfigError);
  }

  SUBCASE("missing schema_version") {
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"fabric":{"modules":[{"anchor":[0,0,0],
                            "axis":[1,0,0],"aperture_length_m":0.1}]}})"),
                    ConfigError);
  }

  SUBCASE("unsupported schema_version") {
    CHECK_THROWS_AS(scenario_from_json_text(
                        R"({"schema_version":2,"fabric":{"modules":[
                            {"anchor":[0,0,0],"axis":[1,0,0],
                             "aperture_length_m":0.1}]}})"),
                    ConfigError);
  }

  SUBCASE("references must differ from scene targets") {
    std::string text = slurp(config_dir() / "nominal_noiseless.json");
    const std::string needle = "\"references\": [";
    const auto at = text.find(needle);
    REQUIRE(at != std::string::npos);
    text.insert(at + needle.size(),
                "\n    { \"position\": [0.02, 0.5, 0.0], \"rcs_m2\": 1.0 },");
    CHECK_THROWS_AS(scenario_from_json_text(text), ConfigError);
  }
}

TEST_CASE("top-level seed overrides the noise seed") {
  std::string text = slurp(config_dir() / "perturbed.json");
  Scenario base = scenario_from_json_text(text);
  CHECK(base.noise.seed == 42);
  text.insert(text.rfind('}'), ", \"seed\": 99\n");
  Scenario overridden = scenario_from_json_text(text);
  CHECK(overridden.noise.seed == 99);
}

TEST_CASE("guard failures surface as validation errors") {
  const Scenario s = load_scenario(data_dir() / "bad_guard.json");
  CHECK_THROWS_AS(run_e2e(s, false), ValidationError);
}

TEST_CASE("full pipeline runs and writes a complete artifact set") {
  const Scenario s = load_scenario(config_dir() / "nominal_noiseless.json");
  const E2EResult result = run_e2e(s, true);

  CHECK(result.guard_report.passed);
  CHECK(result.calibrated);
  CHECK(result.fit.converged);
  CHECK(result.has_image);
  CHECK(result.usable.states.size() == 64);

  const fs::path out = fs::temp_directory_path() / "faacaf_e2e_test";
  fs::remove_all(out);
  write_e2e_outputs(s, result, out);

  // manifest lists every emitted file with its hash
  const std::string manifest = slurp(out / "manifest.json");
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(out)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;
    ++files;
    CHECK(manifest.find('"' + name + '"') != std::string::npos);
  }
  CHECK(files >= 9);

  SUBCASE("same config and seed reproduce byte-identical outputs") {
    const fs::path out2 = fs::temp_directory_path() / "faacaf_e2e_test2";
    fs::remove_all(out2);
    const E2EResult again = run_e2e(s, true);
    write_e2e_outputs(s, again, out2);
    for (const char* name :
         {"schedule.csv", "cube.bin", "snr_table.csv", "image.csv",
          "calibrated_mapping.csv"}) {
      CHECK(fnv1a64_file(out / name) == fnv1a64_file(out2 / name));
    }
    fs::remove_all(out2);
  }
  fs::remove_all(out);
}

TEST_CASE("noiseless localization error is within grid quantization") {
  const Scenario s = load_scenario(config_dir() / "nominal_noiseless.json");
  const E2EResult result = run_e2e(s, true);
  REQUIRE(result.has_image);
  const Vec3 truth = s.scene[0].position;
  const double half_diag = s.grid.spacing_m * std::sqrt(2.0) / 2.0;
  CHECK(localization_error(result.metrics, truth) <= half_diag);
}

TEST_CASE("calibrated focusing beats the nominal mapping when perturbed") {
  const Scenario s = load_scenario(config_dir() / "perturbed.json");
  const E2EResult calibrated = run_e2e(s, true);
  const E2EResult nominal = run_e2e(s, false);
  REQUIRE(calibrated.has_image);
  REQUIRE(nominal.has_image);
  const Vec3 truth = s.scene[0].position;
  CHECK(localization_error(calibrated.metrics, truth) <
        localization_error(nominal.metrics, truth));
}

TEST_CASE("budget flow reads the worked example from config") {
  const Scenario s = load_scenario(config_dir() / "worked_example.json");
  const BudgetReport report = run_budget(s);
  CHECK(report.total_loss_db == doctest::Approx(8.0));
  CHECK(report.m_eff == 44);
}
