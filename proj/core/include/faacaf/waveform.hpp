#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "faacaf/types.hpp"

namespace faacaf {

struct Band {
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;

  double width_hz() const { return f_hi_hz - f_lo_hz; }
  void validate() const {
    if (f_lo_hz <= 0.0 || f_hi_hz <= f_lo_hz)
      throw ConfigError("band requires 0 < f_lo < f_hi");
  }
  /// Normalized in-band coordinate, 0 at f_lo and 1 at f_hi.
  double normalized(double f_hz) const {
    return (f_hz - f_lo_hz) / width_hz();
  }
};

/// A module's exclusive frequency slice B_k. Intervals are closed below and
/// open above so every boundary frequency has exactly one owner.
struct Subband {
  int module_id = 0;
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;

  double width_hz() const { return f_hi_hz - f_lo_hz; }
  bool contains(double f_hz) const { return f_hz >= f_lo_hz && f_hz < f_hi_hz; }
  /// Span check tolerates sub-mHz rounding from center +/- B/2 arithmetic.
  bool contains_span(double lo_hz, double hi_hz) const {
    constexpr double tol = 1e-3;
    return lo_hz >= f_lo_hz - tol && hi_hz <= f_hi_hz + tol;
  }
};

struct ChirpSpec {
  int state_index = 0;
  int evolution = 0;
  double f_center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double t_chirp_s = 0.0;
  double sample_rate_hz = 0.0;
  double t_start_s = 0.0;

  double slope_hz_per_s() const { return bandwidth_hz / t_chirp_s; }
};

struct ChirpSchedule {
  Band band;
  std::vector<Subband> subbands;
  std::vector<ChirpSpec> chirps;  // evolution-major, ascending f_c within a pass
  double guard_time_s = 0.0;
  int num_states = 0;
  int evolutions = 0;

  /// f_c[m] for m = 0..M-1 (identical across evolutions).
  std::vector<double> state_frequencies() const;
  /// Revisit interval of one frequency state (one full sweep).
  double t_pri_s() const {
    return num_states * (chirps.front().t_chirp_s + guard_time_s);
  }
  int fast_time_samples() const {
    const ChirpSpec& c = chirps.front();
    return static_cast<int>(c.sample_rate_hz * c.t_chirp_s + 0.5);
  }
  const ChirpSpec& chirp(int m, int q) const {
    return chirps[static_cast<std::size_t>(q) * num_states + m];
  }
  int subband_of_state(int m) const;
};

struct GuardBudget {
  double t_max_s = 0.0;       // worst-case round-trip delay 2 R_max / c
  double t_ringing_s = 0.0;
  double t_multipath_s = 0.0;

  double sum_s() const { return t_max_s + t_ringing_s + t_multipath_s; }
};

struct ValidationReport {
  bool passed = false;
  double margin_s = 0.0;  // T_g - (T_max + T_ringing + T_multipath)
  std::string message;
};

/// Partition a band into K equal-width subbands separated by guard_band_hz.
std::vector<Subband> assign_subbands(const Band& band, int num_modules,
                                     double guard_band_hz);

/// Lay out M frequency states across the subbands (count proportional to
/// subband width, remainder to the lowest index) and emit the chirp train:
/// evolutions passes, states ascending in f_c, consecutive chirps separated
/// by guard_time_s.
ChirpSchedule build_schedule(const Band& band,
                             const std::vector<Subband>& subbands,
                             int num_states, double bandwidth_hz,
                             double t_chirp_s, double guard_time_s,
                             int evolutions, double sample_rate_hz);

/// Passes iff T_g strictly exceeds the budget sum.
ValidationReport validate_guard_gaps(const ChirpSchedule& schedule,
                                     const GuardBudget& budget);

/// One row per chirp: state_index, evolution, f_center_hz, bandwidth_hz,
/// t_start_s, t_chirp_s.
void write_schedule_csv(const ChirpSchedule& schedule, std::ostream& out);

}  // namespace faacaf
