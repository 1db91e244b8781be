#include <cmath>
#include <complex>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace faacaf;

namespace {

RawDataCube reference_cube(const CalibContext& ctx,
                           const PerturbationState& truth) {
  std::vector<Target> scene;
  for (const ReferenceScatterer& r : ctx.references)
    scene.push_back({r.position, r.rcs_m2, 0.0});
  return synthesize_beat(ctx.schedule, ctx.fabric, truth, scene, ctx.noise,
                         2.0);
}

}  // namespace

TEST_CASE("validate_references enforces count and angular diversity") {
  const FabricConfig fabric = testfix::one_module_fabric();
  auto refs = testfix::enclosure_references();

  CHECK_NOTHROW(validate_references(refs, fabric));

  SUBCASE("two scatterers are rejected") {
    refs.pop_back();
    CHECK_THROWS_AS(validate_references(refs, fabric), ConfigError);
  }

  SUBCASE("near-collinear bearings are rejected") {
    refs[1].position = {0.3, 0.001, 0.0};  // < 5 deg from ref 0's bearing
    CHECK_THROWS_AS(validate_references(refs, fabric), ConfigError);
  }

  SUBCASE("non-positive RCS is rejected") {
    refs[0].rcs_m2 = 0.0;
    CHECK_THROWS_AS(validate_references(refs, fabric), ConfigError);
  }
}

TEST_CASE("measurement matches the forward model in the noiseless case") {
  const CalibContext ctx = testfix::wideband_calib_context(16);
  const CalibParams theta0 = CalibParams::zero(1);

  SUBCASE("isolated scatterer matches its modelled bin response to 1e-6") {
    for (int p = 0; p < 3; ++p) {
      const std::vector<Target> lone = {
          {ctx.references[p].position, ctx.references[p].rcs_m2, 0.0}};
      const RawDataCube cube = synthesize_beat(
          ctx.schedule, ctx.fabric, {}, lone, ctx.noise, 2.0);
      const CalibMeasurement meas = measure_references(ctx, cube);
      for (int m = 0; m < meas.num_states; ++m) {
        const std::complex<double> model =
            model_reference_response(ctx, theta0, p, m);
        const std::complex<double> got = meas.at(p, m);
        CHECK(std::abs(got - model) <= 1e-6 * std::abs(model));
      }
    }
  }

  SUBCASE("objective at the true parameters is numerically zero") {
    const CalibMeasurement meas =
        measure_references(ctx, reference_cube(ctx, {}));
    double total = 0.0;
    for (const auto& v : meas.values) total += std::norm(v);
    CHECK(calibration_objective(ctx, meas, theta0) <= 1e-12 * total);
  }

  SUBCASE("injected delay shows up as a cross-state phase slope") {
    PerturbationState truth;
    truth.delay_offset_s = 2e-10;
    const CalibMeasurement with =
        measure_references(ctx, reference_cube(ctx, truth));
    const CalibMeasurement without =
        measure_references(ctx, reference_cube(ctx, {}));
    const auto freqs = ctx.schedule.state_frequencies();
    // phase(with/without) should track -2 pi f tau across states
    for (int m = 0; m < with.num_states; ++m) {
      const double got =
          std::arg(with.at(0, m) * std::conj(without.at(0, m)));
      const double expect = -2.0 * M_PI * freqs[m] * truth.delay_offset_s;
      CHECK(std::abs(std::remainder(got - expect, 2.0 * M_PI)) < 1e-6);
    }
  }
}

TEST_CASE("model amplitude follows the gain polynomial") {
  const CalibContext ctx = testfix::wideband_calib_context(4);
  CalibParams flat = CalibParams::zero(1);
  CalibParams boosted = CalibParams::zero(1);
  boosted.gain_coeffs[0] = 20.0 * std::log10(2.0);  // 6.02 dB
  for (int m = 0; m < 4; ++m) {
    const auto base = model_reference_response(ctx, flat, 0, m);
    const auto doubled = model_reference_response(ctx, boosted, 0, m);
    CHECK(std::abs(doubled) ==
          doctest::Approx(2.0 * std::abs(base)).epsilon(1e-12));
  }
}

TEST_CASE("measure_references rejects unresolvable geometry") {
  CalibContext ctx = testfix::wideband_calib_context(8);
  // 2 GHz chirps resolve 7.5 cm; put two references 2 cm apart in range
  ctx.references[1].position = {0.0, 0.17, 0.0};
  const RawDataCube cube = reference_cube(ctx, {});
  CHECK_THROWS_AS(measure_references(ctx, cube), ValidationError);
}

TEST_CASE("fit recovers the zero parameter vector on nominal data") {
  const CalibContext ctx = testfix::wideband_calib_context(24);
  const CalibMeasurement meas =
      measure_references(ctx, reference_cube(ctx, {}));
  const FitReport report =
      fit_calibration(ctx, meas, CalibParams::zero(1));

  CHECK(report.converged);
  CHECK_FALSE(report.identifiability_warning);
  CHECK(std::abs(report.theta_hat.tau0_s) < 1e-15);
  for (double g : report.theta_hat.gain_coeffs) CHECK(std::abs(g) < 1e-6);
  CHECK(report.theta_hat.module_offsets[0].norm() < 1e-9);
  // accepted steps never increase the objective
  for (std::size_t i = 1; i < report.residual_history.size(); ++i)
    CHECK(report.residual_history[i] <= report.residual_history[i - 1]);
}

TEST_CASE("normalize_state applies delay phase and gain") {
  const RawDataCube cube = [&] {
    const FabricConfig fabric = testfix::one_module_fabric();
    const ChirpSchedule s = testfix::wideband_schedule(2, 1);
    const std::vector<Target> scene = {{{0.0, 0.5, 0.0}, 1.0, 0.0}};
    return synthesize_beat(s, fabric, {}, scene, testfix::quiet_noise(), 2.0);
  }();
  const RangeProfile p = range_profile(cube, 0, 0);
  const Band band = testfix::full_band();

  SUBCASE("zero theta is the identity") {
    const RangeProfile out = normalize_state(p, CalibParams::zero(1), band);
    for (std::size_t k = 0; k < p.bins.size(); ++k)
      CHECK(out.bins[k] == p.bins[k]);
  }

  SUBCASE("gain-only theta rescales magnitudes, leaves phases alone") {
    CalibParams theta = CalibParams::zero(1);
    theta.gain_coeffs[0] = 6.0;
    const RangeProfile out = normalize_state(p, theta, band);
    const double scale = std::pow(10.0, -6.0 / 20.0);
    for (std::size_t k = 0; k < p.bins.size(); ++k) {
      CHECK(std::abs(out.bins[k]) ==
            doctest::Approx(scale * std::abs(p.bins[k])));
      if (std::abs(p.bins[k]) > 1e-12)
        CHECK(std::arg(out.bins[k]) == doctest::Approx(std::arg(p.bins[k])));
    }
  }

  SUBCASE("delay normalization cancels the synthesized delay phase") {
    PerturbationState truth;
    truth.delay_offset_s = 2e-10;
    const FabricConfig fabric = testfix::one_module_fabric();
    const ChirpSchedule s = testfix::wideband_schedule(2, 1);
    const std::vector<Target> scene = {{{0.0, 0.5, 0.0}, 1.0, 0.0}};
    const RawDataCube pert = synthesize_beat(s, fabric, truth, scene,
                                             testfix::quiet_noise(), 2.0);
    CalibParams theta = CalibParams::zero(1);
    theta.tau0_s = truth.delay_offset_s;
    for (int m = 0; m < 2; ++m) {
      const RangeProfile raw = range_profile(pert, m, 0);
      const RangeProfile fixed = normalize_state(raw, theta, band);
      const RangeProfile clean = range_profile(
          synthesize_beat(s, fabric, {}, scene, testfix::quiet_noise(), 2.0),
          m, 0);
      // pick the peak bin and compare phases
      std::size_t peak = 0;
      for (std::size_t k = 1; k < clean.bins.size(); ++k)
        if (std::norm(clean.bins[k]) > std::norm(clean.bins[peak])) peak = k;
      CHECK(std::arg(fixed.bins[peak] * std::conj(clean.bins[peak])) ==
            doctest::Approx(0.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("calibrated_map applies fitted offsets") {
  const FabricConfig fabric = testfix::one_module_fabric();
  CalibParams theta = CalibParams::zero(1);

  SUBCASE("zero offsets reproduce the nominal mapping") {
    for (double f = 60.5e9; f < 66e9; f += 1e9)
      CHECK((calibrated_map(theta, fabric, f) -
             nominal_map(fabric, f)).norm() == 0.0);
  }

  SUBCASE("fitted offset shifts the whole module") {
    theta.module_offsets[0] = {0.0005, -0.0002, 0.0};
    for (double f = 60.5e9; f < 66e9; f += 1e9) {
      const Vec3 d = calibrated_map(theta, fabric, f) - nominal_map(fabric, f);
      CHECK(d.x == doctest::Approx(0.0005));
      CHECK(d.y == doctest::Approx(-0.0002));
    }
  }
}

TEST_CASE("fit report serializes to JSON") {
  FitReport report;
  report.theta_hat = CalibParams::zero(2);
  report.residual_history = {3.0, 1.0, 0.5};
  report.converged = true;
  report.iterations = 2;
  std::ostringstream out;
  write_fit_report_json(report, out);
  CHECK(out.str().find("\"converged\": true") != std::string::npos);
  CHECK(out.str().find("residual_history") != std::string::npos);
}
