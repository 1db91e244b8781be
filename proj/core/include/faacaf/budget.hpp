#pragma once

#include <ostream>
#include <utility>
#include <vector>

#include "faacaf/fabric.hpp"

namespace faacaf {

struct BudgetInput {
  double coupling_db = 0.0;
  double guided_wave_db = 0.0;
  double insertion_db = 0.0;
  double ripple_db = 0.0;  // residual-mismatch component of the penalty
  double baseline_snr_db = 20.0;
  double reference_range_m = 3.0;
  double baseline_max_range_m = 5.0;
  int num_states = 64;
  double threshold_db = 10.0;
  /// Per-state ripple excursion in dB (positive = extra loss); drives the
  /// effective-aperture count. Empty means no per-state ripple.
  std::vector<double> per_state_ripple_db;

  void validate() const;
};

struct BudgetReport {
  double total_loss_db = 0.0;
  double snr_at_reference_db = 0.0;
  double range_reduction_factor = 1.0;
  double reduced_max_range_m = 0.0;
  int m_eff = 0;
  std::vector<double> per_state_snr_db;
  std::vector<int> below_threshold_states;
};

/// Arithmetic sum of the four clip-on loss components.
double total_clip_on_loss(double coupling_db, double guided_wave_db,
                          double insertion_db, double ripple_db);

/// Maximum-range shrink factor 10^(loss/40) from the monostatic R^-4 law.
double range_reduction_factor(double loss_db);

double reduced_max_range(double baseline_max_range_m, double loss_db);

/// Count of states strictly above threshold plus the list of those at or
/// below it (same strictness as usable-state selection).
std::pair<int, std::vector<int>> effective_aperture(
    const std::vector<double>& per_state_snr_db, double threshold_db);

BudgetReport budget_report(const BudgetInput& input);

/// The bundled deep-ripple profile that renders 20 of 64 states unusable at
/// a 10 dB threshold. Version-pinned; do not retune without updating every
/// fixture consumer.
RippleProfile meff_fixture_profile();

/// State frequencies of the canonical fixture schedule (60-66 GHz, one
/// subband, 64 states, 80 MHz chirps).
std::vector<double> meff_fixture_state_frequencies();

/// Fixture ripple evaluated at the canonical state frequencies.
std::vector<double> meff_fixture_state_ripple_db();

/// The worked link-budget example shipped with the tool: 4/1/2/1 dB losses,
/// 20 dB baseline at 3 m, 5 m max range, 64 states, 10 dB threshold, deep
/// ripple fixture.
BudgetInput worked_example_input();

void write_budget_report(const BudgetReport& report, std::ostream& out);
void write_budget_csv(const BudgetReport& report, std::ostream& out);

}  // namespace faacaf
