#pragma once

#include <complex>
#include <string>
#include <vector>

#include "faacaf/echo.hpp"

namespace faacaf {

enum class Window { kRect, kHann, kHamming, kBlackman };

Window window_from_name(const std::string& name);
std::vector<double> make_window(Window window, int n);

/// Windowed, zero-padded DFT with the phase reference at the window center,
/// so a tone's phase is flat across neighboring bins (interpolation-safe).
/// Unnormalized: an on-bin unit tone peaks at sum(w).
std::vector<std::complex<double>> spectrum(
    const std::vector<std::complex<double>>& samples, Window window,
    int zero_pad);

/// Complex range profile of one (state, evolution) slice. Keeps the
/// positive-beat half of the padded spectrum; bin k sits at range
/// k * bin_spacing_m.
struct RangeProfile {
  int state = 0;
  double f_center_hz = 0.0;
  double slope_hz_per_s = 0.0;
  std::vector<std::complex<double>> bins;
  double bin_spacing_m = 0.0;
  double noise_floor = 0.0;  // linear power, median-based
  bool noiseless = false;

  double range_at(int k) const { return k * bin_spacing_m; }
  double max_range() const {
    return (static_cast<int>(bins.size()) - 1) * bin_spacing_m;
  }
  /// Complex value linearly interpolated at range r; zero outside the axis.
  std::complex<double> interp(double range_m) const;
};

RangeProfile range_profile(const RawDataCube& cube, int m, int q,
                           Window window = Window::kHann, int zero_pad = 4);

/// 10 log10(peak power / noise floor). Throws on a zero floor unless the
/// profile is flagged noiseless (then +inf, or -inf for an all-zero profile).
double estimate_state_snr(const RangeProfile& profile);

struct UsableSet {
  std::vector<int> states;
  double threshold_db = 0.0;

  bool contains(int m) const;
};

/// States whose SNR strictly exceeds the threshold.
UsableSet usable_states(const std::vector<double>& snr_db,
                        double threshold_db);
UsableSet usable_states(const std::vector<RangeProfile>& profiles,
                        double threshold_db);

/// Per-state SNR from the evolution-averaged power spectrum (low-variance
/// estimate used for usable-set selection on a full cube).
std::vector<double> state_snrs(const RawDataCube& cube,
                               Window window = Window::kHann,
                               int zero_pad = 4);

/// Slow-time spectra for one state: doppler_bins x range_bins, fftshifted.
/// Positive velocity = increasing range.
struct DopplerProfile {
  int state = 0;
  double f_center_hz = 0.0;
  int num_doppler_bins = 0;
  int num_range_bins = 0;
  std::vector<std::complex<double>> bins;  // row d, column r
  std::vector<double> velocity_axis_mps;

  std::complex<double> at(int d, int r) const {
    return bins[static_cast<std::size_t>(d) * num_range_bins + r];
  }
  /// Velocity of the strongest cell.
  double peak_velocity_mps() const;
};

DopplerProfile doppler_spectrum(const RawDataCube& cube, int m,
                                Window window = Window::kHann);

void write_profile_csv(const RangeProfile& profile, std::ostream& out);
void write_snr_table_csv(const std::vector<double>& snr_db,
                         const std::vector<double>& state_frequencies,
                         std::ostream& out);

}  // namespace faacaf
