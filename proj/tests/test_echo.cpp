#include <cmath>
#include <complex>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace faacaf;
using testfix::one_module_fabric;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TEST_CASE("radar_snr follows the 40 log10 law") {
  NoiseSpec spec;
  spec.reference_snr_db = 20.0;
  spec.reference_range_m = 3.0;

  CHECK(radar_snr(3.0, spec, 8.0) == doctest::Approx(12.0));
  CHECK(radar_snr(3.0, spec, 0.0) == doctest::Approx(20.0));
  CHECK(radar_snr(6.0, spec, 0.0) == doctest::Approx(7.9588).epsilon(1e-4));
}

TEST_CASE("synthesize_beat produces the documented tone") {
  const FabricConfig fabric = one_module_fabric();
  const ChirpSchedule schedule = testfix::canonical_schedule(4, 1);
  NoiseSpec noise = testfix::quiet_noise();
  const std::vector<Target> scene = {{{0.0, 3.0, 0.0}, 1.0, 0.0}};

  const RawDataCube cube =
      synthesize_beat(schedule, fabric, {}, scene, noise, 5.0);

  SUBCASE("beat frequency is 2SR/c = 40 kHz at 3 m") {
    // S = 80 MHz / 40 us = 2e12 Hz/s; estimate frequency from the mean
    // sample-to-sample phase increment
    const int n_fast = cube.fast_time_samples;
    double acc = 0.0;
    for (int n = 1; n < n_fast; ++n)
      acc += std::arg(cube.at(0, 0, n) * std::conj(cube.at(0, 0, n - 1)));
    const double f_est = acc / (n_fast - 1) / kTwoPi * 2e6;
    const double r = (scene[0].position -
                      nominal_map(fabric, schedule.chirp(0, 0).f_center_hz))
                         .norm();
    const double f_expect = 2.0 * 2e12 * r / kSpeedOfLight;
    CHECK(f_est == doctest::Approx(f_expect).epsilon(1e-6));
    CHECK(f_expect == doctest::Approx(40e3).epsilon(2e-3));
  }

  SUBCASE("fast-time-zero phase matches the closed form") {
    PerturbationState truth;
    truth.delay_offset_s = 2e-10;
    const RawDataCube c2 =
        synthesize_beat(schedule, fabric, truth, scene, noise, 5.0);
    for (int m = 0; m < c2.num_states; ++m) {
      const double f_c = schedule.chirp(m, 0).f_center_hz;
      const double r =
          (scene[0].position - nominal_map(fabric, f_c)).norm();
      const double expect = -2.0 * kTwoPi * f_c * r / kSpeedOfLight -
                            kTwoPi * f_c * truth.delay_offset_s;
      const double got = std::arg(c2.at(m, 0, 0));
      const double diff =
          std::remainder(got - expect, kTwoPi);
      CHECK(std::abs(diff) < 1e-9);
    }
  }
}

TEST_CASE("same seed gives a bit-identical cube") {
  const FabricConfig fabric = one_module_fabric();
  const ChirpSchedule schedule = testfix::canonical_schedule(4, 2);
  NoiseSpec noise;
  noise.seed = 777;
  const std::vector<Target> scene = {{{0.0, 2.0, 0.0}, 1.0, 0.0}};

  const RawDataCube a =
      synthesize_beat(schedule, fabric, {}, scene, noise, 5.0);
  const RawDataCube b =
      synthesize_beat(schedule, fabric, {}, scene, noise, 5.0);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(a.samples[i] == b.samples[i]);

  noise.seed = 778;
  const RawDataCube c =
      synthesize_beat(schedule, fabric, {}, scene, noise, 5.0);
  CHECK(a.samples != c.samples);
}

TEST_CASE("empty scene is unit-variance noise with no detection peak") {
  const FabricConfig fabric = one_module_fabric();
  const ChirpSchedule schedule = testfix::canonical_schedule(8, 4);
  NoiseSpec noise;
  noise.seed = 5;

  const RawDataCube cube =
      synthesize_beat(schedule, fabric, {}, {}, noise, 5.0);
  double power = 0.0;
  for (const auto& s : cube.samples) power += std::norm(s);
  power /= static_cast<double>(cube.samples.size());
  CHECK(power == doctest::Approx(1.0).epsilon(0.05));

  // no state should clear a 10 dB threshold on pure noise
  const std::vector<double> snrs = state_snrs(cube);
  for (double snr : snrs) CHECK(snr < 10.0);
}

TEST_CASE("target beyond R_max is rejected") {
  const FabricConfig fabric = one_module_fabric();
  const ChirpSchedule schedule = testfix::canonical_schedule(2, 1);
  const std::vector<Target> scene = {{{0.0, 7.0, 0.0}, 1.0, 0.0}};
  CHECK_THROWS_AS(synthesize_beat(schedule, fabric, {}, scene,
                                  testfix::quiet_noise(), 5.0),
                  ValidationError);
}

TEST_CASE("slow-time phase advances by the Doppler increment") {
  const FabricConfig fabric = one_module_fabric();
  const ChirpSchedule schedule = testfix::canonical_schedule(2, 8);
  const std::vector<Target> scene = {{{0.0, 3.0, 0.0}, 1.0, 1.0}};

  const RawDataCube cube = synthesize_beat(schedule, fabric, {}, scene,
                                           testfix::quiet_noise(), 5.0);
  const double f_c = schedule.chirp(0, 0).f_center_hz;
  const double t_pri = schedule.t_pri_s();
  // receding at 1 m/s: phase decreases by 4 pi f v T_pri / c per evolution
  const double expect = -2.0 * kTwoPi * f_c * 1.0 * t_pri / kSpeedOfLight;
  for (int q = 1; q < 8; ++q) {
    const double inc =
        std::arg(cube.at(0, q, 0) * std::conj(cube.at(0, q - 1, 0)));
    CHECK(std::remainder(inc - expect, kTwoPi) ==
          doctest::Approx(0.0).epsilon(1e-6));
  }
}

TEST_CASE("post-FFT peak SNR tracks the requested level") {
  const FabricConfig fabric = one_module_fabric();
  const ChirpSchedule schedule = testfix::canonical_schedule(1, 1);
  const std::vector<Target> scene = {{{0.0, 3.0, 0.0}, 1.0, 0.0}};
  NoiseSpec noise;
  noise.reference_snr_db = 20.0;
  noise.reference_range_m = 3.0;

  double mean = 0.0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    noise.seed = 1000 + t;
    const RawDataCube cube =
        synthesize_beat(schedule, fabric, {}, scene, noise, 5.0);
    mean += estimate_state_snr(range_profile(cube, 0, 0));
  }
  mean /= trials;
  CHECK(mean == doctest::Approx(20.0).epsilon(0.05));
}

TEST_CASE("cube binary export round-trips dimensions in the header") {
  const FabricConfig fabric = one_module_fabric();
  const ChirpSchedule schedule = testfix::canonical_schedule(2, 2);
  const RawDataCube cube = synthesize_beat(schedule, fabric, {}, {},
                                           testfix::quiet_noise(), 5.0);
  std::ostringstream bin, hdr;
  write_cube_binary(cube, bin);
  write_cube_header(cube, hdr);
  CHECK(bin.str().size() == cube.samples.size() * 2 * sizeof(float));
  CHECK(hdr.str().find("num_states: 2") != std::string::npos);
  CHECK(hdr.str().find("evolutions: 2") != std::string::npos);
}
