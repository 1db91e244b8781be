#pragma once

#include <complex>
#include <cstdint>
#include <ostream>
#include <vector>

#include "faacaf/fabric.hpp"
#include "faacaf/waveform.hpp"

namespace faacaf {

struct Target {
  Vec3 position;                    // m
  double rcs_m2 = 1.0;              // sigma
  double radial_velocity_mps = 0.0; // along LOS from each virtual sample
};

struct NoiseSpec {
  double reference_snr_db = 20.0;  // post-FFT peak SNR of a 1 m^2 target
  double reference_range_m = 3.0;
  std::uint64_t seed = 0;
  bool enabled = true;
};

/// Dechirped complex beat samples indexed (state m, evolution q, fast-time n).
struct RawDataCube {
  int num_states = 0;
  int evolutions = 0;
  int fast_time_samples = 0;
  std::vector<std::complex<double>> samples;  // C-order (m, q, n)
  ChirpSchedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t fabric_hash = 0;

  std::complex<double>& at(int m, int q, int n) {
    return samples[(static_cast<std::size_t>(m) * evolutions + q) *
                       fast_time_samples +
                   n];
  }
  const std::complex<double>& at(int m, int q, int n) const {
    return samples[(static_cast<std::size_t>(m) * evolutions + q) *
                       fast_time_samples +
                   n];
  }
};

/// Post-range-FFT peak SNR of a 1 m^2 target at range R, in dB:
/// reference + 40 log10(R_ref / R) - extra_loss.
double radar_snr(double range_m, const NoiseSpec& spec, double extra_loss_db);

/// Time-domain beat amplitude that yields the requested post-FFT peak SNR
/// against unit-spectral-density noise under Hann-windowed analysis of
/// n_samples fast-time points.
double beat_amplitude(double snr_db, int n_samples);

/// Generate the beat-signal cube for a scene observed through the fabric.
/// Per (m, q, target): range R from the target position (advanced by the
/// stop-and-hop slow-time motion model) to the truth-perturbed virtual
/// sample; contribution a * exp(j 2 pi f_b n T_s) * exp(-j 4 pi f_c R / c)
/// * exp(-j 2 pi f_c tau_0) with f_b = 2 S R / c. Complex circular Gaussian
/// noise of unit variance is added from a stream seeded per (m, q).
RawDataCube synthesize_beat(const ChirpSchedule& schedule,
                            const FabricConfig& fabric,
                            const PerturbationState& truth,
                            const std::vector<Target>& scene,
                            const NoiseSpec& noise, double r_max_m);

/// Interleaved 32-bit float real/imag in C-order (m, q, n).
void write_cube_binary(const RawDataCube& cube, std::ostream& out);
/// Sidecar text header: dimensions, schedule hash, seed.
void write_cube_header(const RawDataCube& cube, std::ostream& out);
/// Small-cube CSV export: m, q, n, real, imag.
void write_cube_csv(const RawDataCube& cube, std::ostream& out);

std::uint64_t schedule_hash(const ChirpSchedule& schedule);

}  // namespace faacaf
