#include "faacaf/budget.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "faacaf/waveform.hpp"

namespace faacaf {

void BudgetInput::validate() const {
  if (coupling_db < 0.0 || guided_wave_db < 0.0 || insertion_db < 0.0 ||
      ripple_db < 0.0)
    throw ConfigError("loss components must be >= 0");
  if (reference_range_m <= 0.0 || baseline_max_range_m <= 0.0)
    throw ConfigError("ranges must be > 0");
  if (num_states < 1) throw ConfigError("num_states must be >= 1");
  if (!per_state_ripple_db.empty() &&
      static_cast<int>(per_state_ripple_db.size()) != num_states)
    throw ConfigError("per-state ripple length must equal num_states");
}

double total_clip_on_loss(double coupling_db, double guided_wave_db,
                          double insertion_db, double ripple_db) {
  return coupling_db + guided_wave_db + insertion_db + ripple_db;
}

double range_reduction_factor(double loss_db) {
  if (loss_db < 0.0) throw ConfigError("loss must be >= 0");
  return std::pow(10.0, loss_db / 40.0);
}

double reduced_max_range(double baseline_max_range_m, double loss_db) {
  if (baseline_max_range_m <= 0.0)
    throw ConfigError("baseline range must be > 0");
  return baseline_max_range_m / range_reduction_factor(loss_db);
}

std::pair<int, std::vector<int>> effective_aperture(
    const std::vector<double>& per_state_snr_db, double threshold_db) {
  int m_eff = 0;
  std::vector<int> below;
  for (std::size_t m = 0; m < per_state_snr_db.size(); ++m) {
    if (per_state_snr_db[m] > threshold_db)
      ++m_eff;
    else
      below.push_back(static_cast<int>(m));
  }
  return {m_eff, below};
}

BudgetReport budget_report(const BudgetInput& input) {
  input.validate();

  BudgetReport report;
  report.total_loss_db =
      total_clip_on_loss(input.coupling_db, input.guided_wave_db,
                         input.insertion_db, input.ripple_db);
  report.snr_at_reference_db = input.baseline_snr_db - report.total_loss_db;
  report.range_reduction_factor =
      range_reduction_factor(report.total_loss_db);
  report.reduced_max_range_m =
      reduced_max_range(input.baseline_max_range_m, report.total_loss_db);

  const double fixed =
      input.coupling_db + input.guided_wave_db + input.insertion_db;
  report.per_state_snr_db.assign(input.num_states,
                                 input.baseline_snr_db - fixed);
  if (!input.per_state_ripple_db.empty())
    for (int m = 0; m < input.num_states; ++m)
      report.per_state_snr_db[m] -= input.per_state_ripple_db[m];

  auto [m_eff, below] =
      effective_aperture(report.per_state_snr_db, input.threshold_db);
  report.m_eff = m_eff;
  report.below_threshold_states = std::move(below);
  return report;
}

RippleProfile meff_fixture_profile() {
  // Pinned by a parameter search; exactly 20 of 64 canonical states exceed
  // 3 dB of extra ripple loss, with at least 1.0 dB of margin to the
  // crossing on every state.
  RippleProfile profile;
  profile.peak_db = 7.864743798881339;
  profile.amp1 = 1.0;
  profile.amp2 = 0.26716941054473664;
  profile.period1_hz = 501309397.08054113;
  profile.period2_hz = 1600919304.9111784;
  profile.phase1 = 5.148038535155648;
  profile.phase2 = 5.217097143565878;
  return profile;
}

std::vector<double> meff_fixture_state_frequencies() {
  const Band band{60e9, 66e9};
  const std::vector<Subband> subbands = assign_subbands(band, 1, 0.0);
  const ChirpSchedule schedule =
      build_schedule(band, subbands, 64, 80e6, 40e-6, 200e-9, 1, 2e6);
  return schedule.state_frequencies();
}

std::vector<double> meff_fixture_state_ripple_db() {
  const RippleProfile profile = meff_fixture_profile();
  const Band band{60e9, 66e9};
  std::vector<double> ripple;
  for (double f : meff_fixture_state_frequencies())
    ripple.push_back(profile.eval(f, band));
  return ripple;
}

BudgetInput worked_example_input() {
  BudgetInput input;
  input.coupling_db = 4.0;
  input.guided_wave_db = 1.0;
  input.insertion_db = 2.0;
  input.ripple_db = 1.0;
  input.baseline_snr_db = 20.0;
  input.reference_range_m = 3.0;
  input.baseline_max_range_m = 5.0;
  input.num_states = 64;
  input.threshold_db = 10.0;
  input.per_state_ripple_db = meff_fixture_state_ripple_db();
  return input;
}

void write_budget_report(const BudgetReport& report, std::ostream& out) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "clip-on link budget\n"
                "  total loss:            %.3f dB\n"
                "  SNR at reference:      %.3f dB\n"
                "  range reduction:       x%.4f\n"
                "  reduced max range:     %.3f m\n"
                "  effective aperture:    %d of %zu states\n"
                "  below threshold:       %zu states\n",
                report.total_loss_db, report.snr_at_reference_db,
                report.range_reduction_factor, report.reduced_max_range_m,
                report.m_eff, report.per_state_snr_db.size(),
                report.below_threshold_states.size());
  out << buf;
}

void write_budget_csv(const BudgetReport& report, std::ostream& out) {
  out << "total_loss_db,snr_at_reference_db,range_reduction_factor,"
         "reduced_max_range_m,m_eff\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%d\n",
                report.total_loss_db, report.snr_at_reference_db,
                report.range_reduction_factor, report.reduced_max_range_m,
                report.m_eff);
  out << line;
  out << "state,snr_db,usable\n";
  for (std::size_t m = 0; m < report.per_state_snr_db.size(); ++m) {
    const bool below =
        std::find(report.below_threshold_states.begin(),
                  report.below_threshold_states.end(),
                  static_cast<int>(m)) != report.below_threshold_states.end();
    std::snprintf(line, sizeof(line), "%zu,%.17g,%d\n", m,
                  report.per_state_snr_db[m], below ? 0 : 1);
    out << line;
  }
}

}  // namespace faacaf
