#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"

using namespace faacaf;

TEST_CASE("assign_subbands splits the band evenly around guard bands") {
  const Band band{60e9, 66e9};

  SUBCASE("two subbands, 100 MHz guard") {
    const auto subbands = assign_subbands(band, 2, 100e6);
    REQUIRE(subbands.size() == 2);
    CHECK(subbands[0].f_lo_hz == doctest::Approx(60.00e9));
    CHECK(subbands[0].f_hi_hz == doctest::Approx(62.95e9));
    CHECK(subbands[1].f_lo_hz == doctest::Approx(63.05e9));
    CHECK(subbands[1].f_hi_hz == doctest::Approx(66.00e9));
    CHECK(subbands[0].width_hz() + subbands[1].width_hz() ==
          doctest::Approx(5.9e9));
  }

  SUBCASE("single subband owns the band") {
    const auto subbands = assign_subbands(band, 1, 0.0);
    REQUIRE(subbands.size() == 1);
    CHECK(subbands[0].f_lo_hz == 60e9);
    CHECK(subbands[0].f_hi_hz == 66e9);
  }

  SUBCASE("infeasible guard total is rejected") {
    CHECK_THROWS_AS(assign_subbands(band, 64, 200e6), ConfigError);
  }

  SUBCASE("subbands are disjoint and ascending for many K") {
    for (int k = 1; k <= 12; ++k) {
      const auto subbands = assign_subbands(band, k, 50e6);
      for (std::size_t i = 1; i < subbands.size(); ++i) {
        CHECK(subbands[i].f_lo_hz > subbands[i - 1].f_hi_hz - 1e-6);
        CHECK(subbands[i].width_hz() ==
              doctest::Approx(subbands[0].width_hz()));
      }
    }
  }
}

TEST_CASE("build_schedule lays out states and chirps") {
  const Band band{60e9, 66e9};
  const auto one = assign_subbands(band, 1, 0.0);

  SUBCASE("64 states over one subband") {
    const ChirpSchedule s =
        build_schedule(band, one, 64, 80e6, 40e-6, 200e-9, 1, 2e6);
    REQUIRE(s.chirps.size() == 64);
    const auto freqs = s.state_frequencies();
    CHECK(freqs.front() == doctest::Approx(60.04e9));
    CHECK(freqs.back() == doctest::Approx(65.96e9));
    const double spacing = (6e9 - 80e6) / 63.0;
    CHECK(freqs[1] - freqs[0] == doctest::Approx(spacing));
    // every span fits the band
    for (const ChirpSpec& c : s.chirps) {
      CHECK(c.f_center_hz - c.bandwidth_hz / 2 >= 60e9 - 1e-3);
      CHECK(c.f_center_hz + c.bandwidth_hz / 2 <= 66e9 + 1e-3);
    }
  }

  SUBCASE("single state sits at the subband centre") {
    const ChirpSchedule s =
        build_schedule(band, one, 1, 80e6, 40e-6, 200e-9, 1, 2e6);
    REQUIRE(s.chirps.size() == 1);
    CHECK(s.chirps[0].f_center_hz == doctest::Approx(63e9));
  }

  SUBCASE("64 states over two equal subbands -> 32 each") {
    const auto two = assign_subbands(band, 2, 0.0);
    const ChirpSchedule s =
        build_schedule(band, two, 64, 80e6, 40e-6, 200e-9, 1, 2e6);
    int in0 = 0;
    int in1 = 0;
    for (int m = 0; m < s.num_states; ++m)
      (s.subband_of_state(m) == 0 ? in0 : in1)++;
    CHECK(in0 == 32);
    CHECK(in1 == 32);
  }

  SUBCASE("chirp span exceeding a subband is rejected") {
    const auto two = assign_subbands(band, 2, 0.0);
    CHECK_THROWS_AS(build_schedule(band, two, 2, 3.5e9, 40e-6, 200e-9, 1, 8e6),
                    ConfigError);
  }

  SUBCASE("centre frequencies strictly increase within a pass") {
    const ChirpSchedule s =
        build_schedule(band, one, 32, 80e6, 40e-6, 200e-9, 3, 2e6);
    REQUIRE(s.chirps.size() == 96);
    for (int q = 0; q < 3; ++q)
      for (int m = 1; m < 32; ++m)
        CHECK(s.chirp(m, q).f_center_hz > s.chirp(m - 1, q).f_center_hz);
  }

  SUBCASE("consecutive chirps are separated by exactly the guard time") {
    const ChirpSchedule s =
        build_schedule(band, one, 16, 80e6, 40e-6, 200e-9, 2, 2e6);
    for (std::size_t i = 1; i < s.chirps.size(); ++i) {
      const double gap = s.chirps[i].t_start_s -
                         (s.chirps[i - 1].t_start_s + s.chirps[i - 1].t_chirp_s);
      CHECK(gap == doctest::Approx(200e-9));
    }
  }

  SUBCASE("identical inputs give bit-identical schedules") {
    const ChirpSchedule a =
        build_schedule(band, one, 64, 80e6, 40e-6, 200e-9, 2, 2e6);
    const ChirpSchedule b =
        build_schedule(band, one, 64, 80e6, 40e-6, 200e-9, 2, 2e6);
    REQUIRE(a.chirps.size() == b.chirps.size());
    for (std::size_t i = 0; i < a.chirps.size(); ++i) {
      CHECK(a.chirps[i].f_center_hz == b.chirps[i].f_center_hz);
      CHECK(a.chirps[i].t_start_s == b.chirps[i].t_start_s);
    }
  }
}

TEST_CASE("validate_guard_gaps enforces the strict budget inequality") {
  const ChirpSchedule s = testfix::canonical_schedule(8);

  SUBCASE("budget under the 200 ns gap passes with the expected margin") {
    const GuardBudget budget{2.0 * 5.0 / kSpeedOfLight, 50e-9, 100e-9};
    const ValidationReport report = validate_guard_gaps(s, budget);
    CHECK(report.passed);
    CHECK(report.margin_s == doctest::Approx(16.7e-9).epsilon(1e-2));
  }

  SUBCASE("zero gap with zero budget fails (strict)") {
    ChirpSchedule z = s;
    z.guard_time_s = 0.0;
    const ValidationReport report = validate_guard_gaps(z, GuardBudget{});
    CHECK_FALSE(report.passed);
  }

  SUBCASE("equality fails") {
    ChirpSchedule z = s;
    z.guard_time_s = 183.3e-9;
    const GuardBudget budget{183.3e-9 - 150e-9, 50e-9, 100e-9};
    const ValidationReport report = validate_guard_gaps(z, budget);
    CHECK_FALSE(report.passed);
    CHECK(report.margin_s == doctest::Approx(0.0));
  }
}

TEST_CASE("guard validation agrees with brute-force interval overlap") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> guard(0.0, 400e-9);
  std::uniform_real_distribution<double> term(0.0, 150e-9);
  const Band band{60e9, 66e9};
  const auto one = assign_subbands(band, 1, 0.0);

  for (int trial = 0; trial < 200; ++trial) {
    const double t_g = guard(rng);
    const ChirpSchedule s =
        build_schedule(band, one, 4 + static_cast<int>(rng() % 16), 80e6,
                       40e-6, t_g, 1 + static_cast<int>(rng() % 3), 2e6);
    const GuardBudget budget{term(rng), term(rng), term(rng)};
    const ValidationReport report = validate_guard_gaps(s, budget);

    // brute force: each chirp's time support stretched by the budget sum
    // must end strictly before the next chirp starts
    bool ok = true;
    for (std::size_t i = 0; i + 1 < s.chirps.size(); ++i) {
      const double tail =
          s.chirps[i].t_start_s + s.chirps[i].t_chirp_s + budget.sum_s();
      if (tail >= s.chirps[i + 1].t_start_s) ok = false;
    }
    CHECK(report.passed == ok);
  }
}

TEST_CASE("schedule CSV export has one row per chirp") {
  const ChirpSchedule s = testfix::canonical_schedule(4, 2);
  std::ostringstream out;
  write_schedule_csv(s, out);
  const std::string text = out.str();
  std::size_t rows = 0;
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 1 + 8);  // header + 4 states x 2 evolutions
}
