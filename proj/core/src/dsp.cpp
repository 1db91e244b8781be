#include "faacaf/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>

namespace faacaf {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// FFTW planning is not thread-safe; execution of independent plans is.
std::mutex g_plan_mutex;

std::vector<std::complex<double>> fft(
    const std::vector<std::complex<double>>& in) {
  const int n = static_cast<int>(in.size());
  std::vector<std::complex<double>> out(in.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    plan = fftw_plan_dft_1d(
        n,
        reinterpret_cast<fftw_complex*>(
            const_cast<std::complex<double>*>(in.data())),
        reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
        FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}

double median_power(const std::vector<std::complex<double>>& bins) {
  std::vector<double> p(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) p[i] = std::norm(bins[i]);
  const std::size_t mid = p.size() / 2;
  std::nth_element(p.begin(), p.begin() + mid, p.end());
  return p[mid];
}
}  // namespace

Window window_from_name(const std::string& name) {
  if (name == "rect") return Window::kRect;
  if (name == "hann") return Window::kHann;
  if (name == "hamming") return Window::kHamming;
  if (name == "blackman") return Window::kBlackman;
  throw ConfigError("unknown window: " + name);
}

std::vector<double> make_window(Window window, int n) {
  std::vector<double> w(n, 1.0);
  if (n == 1) return w;
  for (int i = 0; i < n; ++i) {
    const double x = kTwoPi * i / (n - 1);
    switch (window) {
      case Window::kRect:
        break;
      case Window::kHann:
        w[i] = 0.5 * (1.0 - std::cos(x));
        break;
      case Window::kHamming:
        w[i] = 0.54 - 0.46 * std::cos(x);
        break;
      case Window::kBlackman:
        w[i] = 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
        break;
    }
  }
  return w;
}

std::vector<std::complex<double>> spectrum(
    const std::vector<std::complex<double>>& samples, Window window,
    int zero_pad) {
  const int n = static_cast<int>(samples.size());
  if (n < 2) throw RuntimeFailure("spectrum requires at least 2 samples");
  if (zero_pad < 1) throw ConfigError("zero_pad factor must be >= 1");

  const int n_fft = n * zero_pad;
  const std::vector<double> w = make_window(window, n);
  std::vector<std::complex<double>> padded(n_fft, {0.0, 0.0});
  for (int i = 0; i < n; ++i) padded[i] = samples[i] * w[i];

  std::vector<std::complex<double>> bins = fft(padded);

  // re-reference phase to the window center
  const double center = 0.5 * (n - 1);
  for (int k = 0; k < n_fft; ++k) {
    const double phase = kTwoPi * k * center / n_fft;
    bins[k] *= std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return bins;
}

std::complex<double> RangeProfile::interp(double range_m) const {
  if (range_m < 0.0 || range_m > max_range()) return {0.0, 0.0};
  const double pos = range_m / bin_spacing_m;
  const int k = std::min(static_cast<int>(pos),
                         static_cast<int>(bins.size()) - 2);
  const double frac = pos - k;
  return bins[k] * (1.0 - frac) + bins[k + 1] * frac;
}

RangeProfile range_profile(const RawDataCube& cube, int m, int q,
                           Window window, int zero_pad) {
  const ChirpSpec& spec = cube.schedule.chirp(m, q);
  std::vector<std::complex<double>> slice(cube.fast_time_samples);
  for (int n = 0; n < cube.fast_time_samples; ++n) slice[n] = cube.at(m, q, n);

  const std::vector<std::complex<double>> full =
      spectrum(slice, window, zero_pad);
  const int n_fft = static_cast<int>(full.size());
  const int n_keep = n_fft / 2;  // positive beat frequencies

  RangeProfile profile;
  profile.state = m;
  profile.f_center_hz = spec.f_center_hz;
  profile.slope_hz_per_s = spec.slope_hz_per_s();
  profile.bins.assign(full.begin(), full.begin() + n_keep);
  const double bin_hz = spec.sample_rate_hz / n_fft;
  profile.bin_spacing_m =
      kSpeedOfLight * bin_hz / (2.0 * spec.slope_hz_per_s());
  profile.noise_floor = median_power(profile.bins) / std::log(2.0);
  return profile;
}

double estimate_state_snr(const RangeProfile& profile) {
  double peak = 0.0;
  for (const std::complex<double>& b : profile.bins)
    peak = std::max(peak, std::norm(b));
  if (profile.noise_floor <= 0.0) {
    if (!profile.noiseless)
      throw RuntimeFailure("SNR undefined: zero noise floor");
    if (peak <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(peak / profile.noise_floor);
}

bool UsableSet::contains(int m) const {
  return std::find(states.begin(), states.end(), m) != states.end();
}

UsableSet usable_states(const std::vector<double>& snr_db,
                        double threshold_db) {
  UsableSet set;
  set.threshold_db = threshold_db;
  for (std::size_t m = 0; m < snr_db.size(); ++m)
    if (snr_db[m] > threshold_db) set.states.push_back(static_cast<int>(m));
  return set;
}

UsableSet usable_states(const std::vector<RangeProfile>& profiles,
                        double threshold_db) {
  std::vector<double> snr(profiles.size());
  for (std::size_t m = 0; m < profiles.size(); ++m)
    snr[m] = estimate_state_snr(profiles[m]);
  return usable_states(snr, threshold_db);
}

std::vector<double> state_snrs(const RawDataCube& cube, Window window,
                               int zero_pad) {
  std::vector<double> snr(cube.num_states);
  for (int m = 0; m < cube.num_states; ++m) {
    std::vector<double> power;
    double floor = 0.0;
    for (int q = 0; q < cube.evolutions; ++q) {
      const RangeProfile p = range_profile(cube, m, q, window, zero_pad);
      if (power.empty()) power.assign(p.bins.size(), 0.0);
      for (std::size_t k = 0; k < p.bins.size(); ++k)
        power[k] += std::norm(p.bins[k]) / cube.evolutions;
      // the median/ln2 correction is exact per evolution (exponential
      // bins), so average the per-evolution floors
      floor += p.noise_floor / cube.evolutions;
    }
    const double peak = *std::max_element(power.begin(), power.end());
    if (floor <= 0.0)
      throw RuntimeFailure("SNR undefined: zero noise floor");
    snr[m] = 10.0 * std::log10(peak / floor);
  }
  return snr;
}

double DopplerProfile::peak_velocity_mps() const {
  int best_d = 0;
  double best = -1.0;
  for (int d = 0; d < num_doppler_bins; ++d)
    for (int r = 0; r < num_range_bins; ++r)
      if (std::norm(at(d, r)) > best) {
        best = std::norm(at(d, r));
        best_d = d;
      }
  return velocity_axis_mps[best_d];
}

DopplerProfile doppler_spectrum(const RawDataCube& cube, int m,
                                Window window) {
  const int q_count = cube.evolutions;
  if (q_count < 2)
    throw RuntimeFailure("insufficient slow time: need >= 2 evolutions");

  const ChirpSpec& spec = cube.schedule.chirp(m, 0);
  const std::vector<double> w = make_window(window, q_count);
  const double t_pri = cube.schedule.t_pri_s();

  // range-compress each evolution first, then transform along slow time
  std::vector<RangeProfile> profiles;
  profiles.reserve(q_count);
  for (int q = 0; q < q_count; ++q)
    profiles.push_back(range_profile(cube, m, q, window, 1));
  const int n_range = static_cast<int>(profiles.front().bins.size());

  DopplerProfile dp;
  dp.state = m;
  dp.f_center_hz = spec.f_center_hz;
  dp.num_doppler_bins = q_count;
  dp.num_range_bins = n_range;
  dp.bins.assign(static_cast<std::size_t>(q_count) * n_range, {0.0, 0.0});

  for (int r = 0; r < n_range; ++r) {
    std::vector<std::complex<double>> slow(q_count);
    for (int q = 0; q < q_count; ++q) slow[q] = profiles[q].bins[r] * w[q];
    const std::vector<std::complex<double>> spec_q = fft(slow);
    // fftshift rows so bin 0 sits at index q_count/2
    for (int k = 0; k < q_count; ++k) {
      const int shifted = (k + q_count / 2) % q_count;
      dp.bins[static_cast<std::size_t>(shifted) * n_range + r] = spec_q[k];
    }
  }

  dp.velocity_axis_mps.resize(q_count);
  for (int d = 0; d < q_count; ++d) {
    const double f_doppler = (d - q_count / 2) / (q_count * t_pri);
    // receding target (increasing range) maps to positive velocity
    dp.velocity_axis_mps[d] =
        -f_doppler * kSpeedOfLight / (2.0 * spec.f_center_hz);
  }
  return dp;
}

void write_profile_csv(const RangeProfile& profile, std::ostream& out) {
  out << "range_m,real,imag,magnitude_db\n";
  char line[160];
  for (std::size_t k = 0; k < profile.bins.size(); ++k) {
    const std::complex<double>& b = profile.bins[k];
    const double mag_db =
        10.0 * std::log10(std::max(std::norm(b), 1e-300));
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n",
                  profile.range_at(static_cast<int>(k)), b.real(), b.imag(),
                  mag_db);
    out << line;
  }
}

void write_snr_table_csv(const std::vector<double>& snr_db,
                         const std::vector<double>& state_frequencies,
                         std::ostream& out) {
  out << "state,f_center_hz,snr_db\n";
  char line[120];
  for (std::size_t m = 0; m < snr_db.size(); ++m) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g\n", m,
                  state_frequencies[m], snr_db[m]);
    out << line;
  }
}

}  // namespace faacaf
