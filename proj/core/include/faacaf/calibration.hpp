#pragma once

#include <array>
#include <complex>
#include <ostream>
#include <vector>

#include "faacaf/dsp.hpp"
#include "faacaf/echo.hpp"
#include "faacaf/fabric.hpp"

namespace faacaf {

struct ReferenceScatterer {
  int id = 0;
  Vec3 position;
  double rcs_m2 = 1.0;
};

/// Exactly three scatterers with range and angular diversity relative to the
/// fabric centroid (no pair within 5 degrees).
void validate_references(const std::vector<ReferenceScatterer>& refs,
                         const FabricConfig& fabric);

/// The fitted parameter vector theta: global delay, quadratic gain profile
/// in dB over normalized band frequency, rigid per-module position offsets.
/// Dimension 4 + 3K, independent of the number of frequency states.
struct CalibParams {
  double tau0_s = 0.0;
  std::array<double, 3> gain_coeffs{};     // g0 + g1 nu + g2 nu^2, dB
  std::vector<Vec3> module_offsets;        // one per module

  double gain_db(double nu) const {
    return gain_coeffs[0] + gain_coeffs[1] * nu + gain_coeffs[2] * nu * nu;
  }
  int dim() const {
    return 4 + 3 * static_cast<int>(module_offsets.size());
  }
  static CalibParams zero(std::size_t num_modules) {
    CalibParams p;
    p.module_offsets.assign(num_modules, Vec3{});
    return p;
  }
  PerturbationState as_perturbation() const {
    PerturbationState s;
    s.delay_offset_s = tau0_s;
    s.module_offsets = module_offsets;
    return s;
  }
};

/// Everything the forward model and the extraction must agree on.
struct CalibContext {
  ChirpSchedule schedule;
  FabricConfig fabric;
  std::vector<ReferenceScatterer> references;
  NoiseSpec noise;          // amplitude convention of the synthesizer
  Window window = Window::kHann;
  int zero_pad = 4;
};

/// Complex responses extracted at the range bin nearest each reference's
/// nominal range, per (scatterer p, state m).
struct CalibMeasurement {
  int num_states = 0;
  int num_refs = 0;
  std::vector<std::complex<double>> values;  // (p, m) row-major
  std::vector<int> bin_index;                // matching extraction bins

  std::complex<double>& at(int p, int m) {
    return values[static_cast<std::size_t>(p) * num_states + m];
  }
  const std::complex<double>& at(int p, int m) const {
    return values[static_cast<std::size_t>(p) * num_states + m];
  }
  int bin(int p, int m) const {
    return bin_index[static_cast<std::size_t>(p) * num_states + m];
  }
};

struct FitReport {
  CalibParams theta_hat;
  std::vector<double> residual_history;  // objective after each accepted step
  bool converged = false;
  int iterations = 0;
  bool identifiability_warning = false;
  std::string diagnostic;
};

/// Modeled complex response of reference p at state m under theta: the
/// radar-equation amplitude and geometric phase of the synthetic echo,
/// observed through the same windowed-DFT bin the extraction uses. Using the
/// identical observation operator on both sides keeps the fit free of
/// bin-quantization bias.
std::complex<double> model_reference_response(const CalibContext& ctx,
                                              const CalibParams& theta, int p,
                                              int m);

/// Extract S_cal(p, m) from a calibration-pass cube (evolution 0), at the
/// bin nearest each reference's nominal range. Throws when two references
/// fall within one pre-padding range bin of each other.
CalibMeasurement measure_references(const CalibContext& ctx,
                                    const RawDataCube& cube);

/// Damped Gauss-Newton (Levenberg-Marquardt) fit of theta to the measured
/// reference responses; complex residuals split into real/imag components,
/// Jacobian by forward finite differences on scaled parameters.
FitReport fit_calibration(const CalibContext& ctx,
                          const CalibMeasurement& measurement,
                          const CalibParams& theta_init);

/// Objective value of the fit residuals at a given theta (used for
/// noise-floor comparisons).
double calibration_objective(const CalibContext& ctx,
                             const CalibMeasurement& measurement,
                             const CalibParams& theta);

/// Phase-align by exp(+j 2 pi f tau_hat) and divide out the fitted gain.
RangeProfile normalize_state(const RangeProfile& profile,
                             const CalibParams& theta, const Band& band);

/// Corrected frequency-to-space mapping using the fitted module offsets.
Vec3 calibrated_map(const CalibParams& theta, const FabricConfig& fabric,
                    double f_hz);

void write_fit_report_json(const FitReport& report, std::ostream& out);
void write_calibrated_mapping_csv(const CalibParams& theta,
                                  const FabricConfig& fabric,
                                  const std::vector<double>& frequencies_hz,
                                  std::ostream& out);

}  // namespace faacaf
