#pragma once

// Shared fixtures for the unit tests: a single-module fabric spanning the
// whole band and schedules built from it.

#include <vector>

#include "faacaf/budget.hpp"
#include "faacaf/calibration.hpp"
#include "faacaf/dsp.hpp"
#include "faacaf/echo.hpp"
#include "faacaf/fabric.hpp"
#include "faacaf/imaging.hpp"
#include "faacaf/waveform.hpp"

namespace testfix {

using namespace faacaf;

inline Band full_band() { return {60e9, 66e9}; }

inline FabricConfig one_module_fabric(double aperture_m = 0.1) {
  FabricConfig fabric;
  ClipOnModule mod;
  mod.id = 0;
  mod.anchor = {0.0, 0.0, 0.0};
  mod.axis = {1.0, 0.0, 0.0};
  mod.aperture_length_m = aperture_m;
  mod.passband = {0, 60e9, 66e9};
  fabric.modules.push_back(mod);
  return fabric;
}

inline ChirpSchedule canonical_schedule(int num_states = 64,
                                        int evolutions = 1) {
  const Band band = full_band();
  return build_schedule(band, assign_subbands(band, 1, 0.0), num_states,
                        80e6, 40e-6, 200e-9, evolutions, 2e6);
}

// Wideband variant: 2 GHz chirps give a 7.5 cm range bin, fine enough to
// resolve the sub-metre reference geometry.
inline ChirpSchedule wideband_schedule(int num_states = 64,
                                       int evolutions = 1) {
  const Band band = full_band();
  return build_schedule(band, assign_subbands(band, 1, 0.0), num_states,
                        2e9, 40e-6, 200e-9, evolutions, 8e6);
}

inline std::vector<ReferenceScatterer> enclosure_references() {
  return {{0, {0.15, 0.0, 0.0}, 1.0},
          {1, {0.0, 0.4, 0.0}, 1.0},
          {2, {0.35, 0.35, 0.45}, 1.0}};
}

inline NoiseSpec quiet_noise() {
  NoiseSpec noise;
  noise.enabled = false;
  return noise;
}

inline CalibContext wideband_calib_context(int num_states = 64) {
  CalibContext ctx;
  ctx.schedule = wideband_schedule(num_states, 1);
  ctx.fabric = one_module_fabric();
  ctx.references = enclosure_references();
  ctx.noise = quiet_noise();
  ctx.window = Window::kHann;
  ctx.zero_pad = 4;
  return ctx;
}

}  // namespace testfix
