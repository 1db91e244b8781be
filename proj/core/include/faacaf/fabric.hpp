#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "faacaf/types.hpp"
#include "faacaf/waveform.hpp"

namespace faacaf {

/// Smooth deterministic two-sinusoid ripple in frequency, rescaled so its
/// peak magnitude over the reference band equals peak_db.
struct RippleProfile {
  double peak_db = 0.0;
  double amp1 = 1.0;
  double amp2 = 0.0;
  double period1_hz = 1e9;
  double period2_hz = 1e9;
  double phase1 = 0.0;
  double phase2 = 0.0;

  double raw(double f_hz) const;
  /// Peak |raw| over the band, sampled on a fixed dense grid.
  double normalization(const Band& band) const;
  double eval(double f_hz, const Band& band) const;
};

struct LossComponents {
  double coupling_db = 0.0;
  double guided_wave_db = 0.0;
  double insertion_db = 0.0;
  RippleProfile ripple;  // ripple.peak_db is the residual-mismatch peak

  double fixed_db() const {
    return coupling_db + guided_wave_db + insertion_db;
  }
};

struct ClipOnModule {
  int id = 0;
  Vec3 anchor;          // c_k, trunk attachment point
  Vec3 axis;            // u_k, unit radiating direction
  double aperture_length_m = 0.0;  // L_k
  Subband passband;
  LossComponents losses;

  void validate() const;
};

struct FabricConfig {
  std::vector<ClipOnModule> modules;
  Vec3 trunk_feed_origin;

  void validate() const;  // unit axes, positive lengths, disjoint passbands
  Vec3 centroid() const;
  std::uint64_t content_hash() const;
};

/// Per-module rigid attachment errors plus global delay / gain distortions.
/// These are the truth-side quantities the calibration model later absorbs.
struct PerturbationState {
  double delay_offset_s = 0.0;            // tau_0
  double gain_tilt_db = 0.0;              // linear in f across the band
  std::vector<Vec3> module_offsets;       // delta_k, one per module (or empty)

  Vec3 offset_of(int module_id) const {
    if (module_offsets.empty()) return {};
    return module_offsets.at(static_cast<std::size_t>(module_id));
  }
  void validate(std::size_t num_modules, double max_offset_m = 0.01) const;
};

/// Gain tilt in dB at frequency f: tilt * (nu - 1/2), zero-mean over the band.
double perturbation_gain_db(const PerturbationState& pert, const Band& band,
                            double f_hz);

/// The unique module whose passband contains f, or nullopt in a guard band.
std::optional<int> active_module(const FabricConfig& fabric, double f_hz);

/// Nominal frequency-to-space mapping x(f): linear scan along the module
/// axis from -L/2 to +L/2 as f sweeps the passband.
Vec3 nominal_map(const FabricConfig& fabric, double f_hz);

/// nominal_map with the active module's anchor shifted by its offset.
Vec3 perturbed_map(const FabricConfig& fabric, const PerturbationState& pert,
                   double f_hz);

/// Fixed clip-on losses plus the ripple profile at f, in dB.
double loss_at(const FabricConfig& fabric, double f_hz);

/// Sampled mapping {(f, x)} for the given frequencies, one CSV row each.
void write_mapping_csv(const FabricConfig& fabric,
                       const std::vector<double>& frequencies_hz,
                       std::ostream& out);

}  // namespace faacaf
