#include "faacaf/waveform.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace faacaf {

std::vector<double> ChirpSchedule::state_frequencies() const {
  std::vector<double> f(num_states);
  for (int m = 0; m < num_states; ++m) f[m] = chirps[m].f_center_hz;
  return f;
}

int ChirpSchedule::subband_of_state(int m) const {
  const double f = chirps[m].f_center_hz;
  for (std::size_t k = 0; k < subbands.size(); ++k)
    if (subbands[k].contains(f)) return static_cast<int>(k);
  throw RuntimeFailure("state frequency outside every subband");
}

std::vector<Subband> assign_subbands(const Band& band, int num_modules,
                                     double guard_band_hz) {
  band.validate();
  if (num_modules < 1) throw ConfigError("need at least one module");
  if (guard_band_hz < 0.0) throw ConfigError("guard_band must be >= 0");

  const double gaps = (num_modules - 1) * guard_band_hz;
  const double width = band.width_hz();
  if (gaps >= width) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "subband split infeasible: %d gaps need %.6g Hz but only "
                  "%.6g Hz available",
                  num_modules - 1, gaps, width);
    throw ConfigError(msg);
  }
  const double sub_width = (width - gaps) / num_modules;

  std::vector<Subband> subbands(num_modules);
  for (int k = 0; k < num_modules; ++k) {
    const double lo = band.f_lo_hz + k * (sub_width + guard_band_hz);
    subbands[k] = {k, lo, lo + sub_width};
  }
  // exact top edge regardless of rounding
  subbands.back().f_hi_hz = band.f_hi_hz;
  return subbands;
}

namespace {

std::vector<int> states_per_subband(const std::vector<Subband>& subbands,
                                    int num_states) {
  const double total =
      std::accumulate(subbands.begin(), subbands.end(), 0.0,
                      [](double s, const Subband& b) { return s + b.width_hz(); });
  std::vector<int> counts(subbands.size());
  int assigned = 0;
  for (std::size_t k = 0; k < subbands.size(); ++k) {
    counts[k] = static_cast<int>(num_states * subbands[k].width_hz() / total);
    assigned += counts[k];
  }
  for (std::size_t k = 0; assigned < num_states; k = (k + 1) % counts.size()) {
    ++counts[k];
    ++assigned;
  }
  return counts;
}

}  // namespace

ChirpSchedule build_schedule(const Band& band,
                             const std::vector<Subband>& subbands,
                             int num_states, double bandwidth_hz,
                             double t_chirp_s, double guard_time_s,
                             int evolutions, double sample_rate_hz) {
  band.validate();
  if (num_states < 1) throw ConfigError("need at least one frequency state");
  if (bandwidth_hz <= 0.0 || t_chirp_s <= 0.0 || sample_rate_hz <= 0.0)
    throw ConfigError("chirp bandwidth, duration and sample rate must be > 0");
  if (guard_time_s < 0.0) throw ConfigError("guard_time must be >= 0");
  if (evolutions < 1) throw ConfigError("need at least one evolution");
  if (subbands.empty()) throw ConfigError("need at least one subband");

  const std::vector<int> counts = states_per_subband(subbands, num_states);

  std::vector<double> centers;
  centers.reserve(num_states);
  for (std::size_t k = 0; k < subbands.size(); ++k) {
    const Subband& sb = subbands[k];
    const int n = counts[k];
    if (n == 0) continue;
    const double lo = sb.f_lo_hz + bandwidth_hz / 2.0;
    const double hi = sb.f_hi_hz - bandwidth_hz / 2.0;
    if (hi < lo) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "chirp span %.6g Hz exceeds subband %zu width %.6g Hz",
                    bandwidth_hz, k, sb.width_hz());
      throw ConfigError(msg);
    }
    for (int i = 0; i < n; ++i) {
      const double f =
          (n == 1) ? (sb.f_lo_hz + sb.f_hi_hz) / 2.0
                   : lo + i * (hi - lo) / (n - 1);
      if (!sb.contains_span(f - bandwidth_hz / 2.0, f + bandwidth_hz / 2.0)) {
        char msg[160];
        std::snprintf(msg, sizeof(msg),
                      "state %zu does not fit subband %zu", centers.size(), k);
        throw ConfigError(msg);
      }
      centers.push_back(f);
    }
  }
  std::sort(centers.begin(), centers.end());

  ChirpSchedule schedule;
  schedule.band = band;
  schedule.subbands = subbands;
  schedule.guard_time_s = guard_time_s;
  schedule.num_states = num_states;
  schedule.evolutions = evolutions;
  schedule.chirps.reserve(static_cast<std::size_t>(num_states) * evolutions);

  int idx = 0;
  for (int q = 0; q < evolutions; ++q) {
    for (int m = 0; m < num_states; ++m, ++idx) {
      ChirpSpec c;
      c.state_index = m;
      c.evolution = q;
      c.f_center_hz = centers[m];
      c.bandwidth_hz = bandwidth_hz;
      c.t_chirp_s = t_chirp_s;
      c.sample_rate_hz = sample_rate_hz;
      c.t_start_s = idx * (t_chirp_s + guard_time_s);
      schedule.chirps.push_back(c);
    }
  }
  return schedule;
}

ValidationReport validate_guard_gaps(const ChirpSchedule& schedule,
                                     const GuardBudget& budget) {
  ValidationReport report;
  report.margin_s = schedule.guard_time_s - budget.sum_s();
  report.passed = schedule.guard_time_s > budget.sum_s();
  char msg[160];
  std::snprintf(msg, sizeof(msg),
                "T_g = %.6g s vs budget %.6g s: margin %.6g s (%s)",
                schedule.guard_time_s, budget.sum_s(), report.margin_s,
                report.passed ? "pass" : "fail");
  report.message = msg;
  return report;
}

void write_schedule_csv(const ChirpSchedule& schedule, std::ostream& out) {
  out << "state_index,evolution,f_center_hz,bandwidth_hz,t_start_s,t_chirp_s\n";
  char line[256];
  for (const ChirpSpec& c : schedule.chirps) {
    std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                  c.state_index, c.evolution, c.f_center_hz, c.bandwidth_hz,
                  c.t_start_s, c.t_chirp_s);
    out << line;
  }
}

}  // namespace faacaf
