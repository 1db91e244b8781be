#include "faacaf/echo.hpp"

#include <cmath>
#include <cstdio>

#include "faacaf/dsp.hpp"
#include "faacaf/rng.hpp"

namespace faacaf {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

double radar_snr(double range_m, const NoiseSpec& spec, double extra_loss_db) {
  if (range_m <= 0.0) throw RuntimeFailure("radar_snr requires R > 0");
  return spec.reference_snr_db +
         40.0 * std::log10(spec.reference_range_m / range_m) - extra_loss_db;
}

double beat_amplitude(double snr_db, int n_samples) {
  const std::vector<double> w = make_window(Window::kHann, n_samples);
  double sw = 0.0, sw2 = 0.0;
  for (double v : w) {
    sw += v;
    sw2 += v * v;
  }
  // peak signal power a^2 Sw^2 over per-bin noise power Sw2 (unit variance)
  return std::sqrt(std::pow(10.0, snr_db / 10.0) * sw2) / sw;
}

RawDataCube synthesize_beat(const ChirpSchedule& schedule,
                            const FabricConfig& fabric,
                            const PerturbationState& truth,
                            const std::vector<Target>& scene,
                            const NoiseSpec& noise, double r_max_m) {
  truth.validate(fabric.modules.size());

  RawDataCube cube;
  cube.num_states = schedule.num_states;
  cube.evolutions = schedule.evolutions;
  cube.fast_time_samples = schedule.fast_time_samples();
  cube.schedule = schedule;
  cube.seed = noise.seed;
  cube.fabric_hash = fabric.content_hash();
  cube.samples.assign(static_cast<std::size_t>(cube.num_states) *
                          cube.evolutions * cube.fast_time_samples,
                      {0.0, 0.0});

  const int n_fast = cube.fast_time_samples;
  const double t_pri = schedule.t_pri_s();

  for (int m = 0; m < cube.num_states; ++m) {
    const ChirpSpec& spec = schedule.chirp(m, 0);
    const double f_c = spec.f_center_hz;
    const double slope = spec.slope_hz_per_s();
    const double ts = 1.0 / spec.sample_rate_hz;
    const Vec3 x_true = perturbed_map(fabric, truth, f_c);
    const double loss_db = loss_at(fabric, f_c);
    const double gain_db =
        perturbation_gain_db(truth, schedule.band, f_c);

    for (int q = 0; q < cube.evolutions; ++q) {
      for (const Target& target : scene) {
        const double r0 = (target.position - x_true).norm();
        if (r0 > r_max_m) {
          char msg[128];
          std::snprintf(msg, sizeof(msg),
                        "target at %.3g m exceeds R_max %.3g m", r0, r_max_m);
          throw ValidationError(msg);
        }
        const Vec3 los = (target.position - x_true).normalized();
        const Vec3 pos =
            target.position + los * (target.radial_velocity_mps * q * t_pri);
        const double r = (pos - x_true).norm();

        const double snr_db = radar_snr(r, noise, loss_db) +
                              10.0 * std::log10(target.rcs_m2);
        const double amp = beat_amplitude(snr_db, n_fast) *
                           std::pow(10.0, gain_db / 20.0);
        const double f_beat = 2.0 * slope * r / kSpeedOfLight;
        const double phi0 = -2.0 * kTwoPi * f_c * r / kSpeedOfLight -
                            kTwoPi * f_c * truth.delay_offset_s;
        for (int n = 0; n < n_fast; ++n) {
          const double phase = kTwoPi * f_beat * n * ts + phi0;
          cube.at(m, q, n) += amp * std::complex<double>(std::cos(phase),
                                                         std::sin(phase));
        }
      }
      if (noise.enabled) {
        Rng rng = Rng::stream(noise.seed, static_cast<std::uint64_t>(m),
                              static_cast<std::uint64_t>(q));
        for (int n = 0; n < n_fast; ++n)
          cube.at(m, q, n) += rng.complex_gaussian();
      }
    }
  }
  return cube;
}

std::uint64_t schedule_hash(const ChirpSchedule& schedule) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, &schedule.band, sizeof(schedule.band));
  h = fnv1a(h, &schedule.guard_time_s, sizeof(double));
  h = fnv1a(h, &schedule.num_states, sizeof(int));
  h = fnv1a(h, &schedule.evolutions, sizeof(int));
  for (const ChirpSpec& c : schedule.chirps)
    h = fnv1a(h, &c, sizeof(ChirpSpec));
  return h;
}

void write_cube_binary(const RawDataCube& cube, std::ostream& out) {
  for (const std::complex<double>& s : cube.samples) {
    const float re = static_cast<float>(s.real());
    const float im = static_cast<float>(s.imag());
    out.write(reinterpret_cast<const char*>(&re), sizeof(float));
    out.write(reinterpret_cast<const char*>(&im), sizeof(float));
  }
}

void write_cube_header(const RawDataCube& cube, std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "format: interleaved float32 real/imag, C-order (m, q, n)\n"
                "num_states: %d\nevolutions: %d\nfast_time_samples: %d\n"
                "schedule_hash: %016llx\nfabric_hash: %016llx\nseed: %llu\n",
                cube.num_states, cube.evolutions, cube.fast_time_samples,
                static_cast<unsigned long long>(schedule_hash(cube.schedule)),
                static_cast<unsigned long long>(cube.fabric_hash),
                static_cast<unsigned long long>(cube.seed));
  out << buf;
}

void write_cube_csv(const RawDataCube& cube, std::ostream& out) {
  out << "state,evolution,sample,real,imag\n";
  char line[160];
  for (int m = 0; m < cube.num_states; ++m)
    for (int q = 0; q < cube.evolutions; ++q)
      for (int n = 0; n < cube.fast_time_samples; ++n) {
        const std::complex<double>& s = cube.at(m, q, n);
        std::snprintf(line, sizeof(line), "%d,%d,%d,%.17g,%.17g\n", m, q, n,
                      s.real(), s.imag());
        out << line;
      }
}

}  // namespace faacaf
