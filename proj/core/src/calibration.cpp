#include "faacaf/calibration.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace faacaf {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

struct StateContext {
  double f_center_hz;
  double slope_hz_per_s;
  double sample_rate_hz;
  int n_fast;
  int n_fft;
};

StateContext state_context(const CalibContext& ctx, int m) {
  const ChirpSpec& spec = ctx.schedule.chirp(m, 0);
  const int n = ctx.schedule.fast_time_samples();
  return {spec.f_center_hz, spec.slope_hz_per_s(), spec.sample_rate_hz, n,
          n * ctx.zero_pad};
}

/// Windowed DFT response (phase-centered convention of spectrum()) of a unit
/// tone exp(j 2 pi f_beat n T_s) observed at bin k.
std::complex<double> tone_bin_response(const StateContext& sc,
                                       const std::vector<double>& window,
                                       double f_beat_hz, int k) {
  const double ts = 1.0 / sc.sample_rate_hz;
  const double center = 0.5 * (sc.n_fast - 1);
  std::complex<double> acc{0.0, 0.0};
  for (int n = 0; n < sc.n_fast; ++n) {
    const double phase = kTwoPi * (f_beat_hz * ts * n -
                                   static_cast<double>(k) * (n - center) /
                                       sc.n_fft);
    acc += window[n] * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return acc;
}

/// Contribution of one scatterer to bin k of state m under theta. Mirrors
/// the synthesizer's amplitude and phase conventions exactly.
std::complex<double> scatterer_bin_contribution(
    const CalibContext& ctx, const std::vector<double>& window,
    const CalibParams& theta, const ReferenceScatterer& ref, int m, int k) {
  const StateContext sc = state_context(ctx, m);
  const PerturbationState offsets = theta.as_perturbation();
  const Vec3 x = perturbed_map(ctx.fabric, offsets, sc.f_center_hz);
  const double r = (ref.position - x).norm();

  const double snr_db = radar_snr(r, ctx.noise, loss_at(ctx.fabric,
                                                        sc.f_center_hz)) +
                        10.0 * std::log10(ref.rcs_m2);
  const double nu = ctx.schedule.band.normalized(sc.f_center_hz);
  const double amp = beat_amplitude(snr_db, sc.n_fast) *
                     std::pow(10.0, theta.gain_db(nu) / 20.0);

  const double f_beat = 2.0 * sc.slope_hz_per_s * r / kSpeedOfLight;
  const double phi0 = -2.0 * kTwoPi * sc.f_center_hz * r / kSpeedOfLight -
                      kTwoPi * sc.f_center_hz * theta.tau0_s;
  return amp * std::complex<double>(std::cos(phi0), std::sin(phi0)) *
         tone_bin_response(sc, window, f_beat, k);
}

std::vector<double> parameter_scales(std::size_t num_modules) {
  std::vector<double> s;
  s.push_back(1e-12);                       // tau0: 1 ps
  for (int i = 0; i < 3; ++i) s.push_back(0.01);  // gain coeffs: 0.01 dB
  for (std::size_t k = 0; k < num_modules; ++k)
    for (int i = 0; i < 3; ++i) s.push_back(1e-5);  // offsets: 10 um
  return s;
}

CalibParams unpack(const Eigen::VectorXd& x,
                   const std::vector<double>& scales,
                   std::size_t num_modules) {
  CalibParams p = CalibParams::zero(num_modules);
  p.tau0_s = x[0] * scales[0];
  for (int i = 0; i < 3; ++i) p.gain_coeffs[i] = x[i + 1] * scales[i + 1];
  for (std::size_t k = 0; k < num_modules; ++k) {
    const int base = 4 + 3 * static_cast<int>(k);
    p.module_offsets[k] = {x[base] * scales[base],
                           x[base + 1] * scales[base + 1],
                           x[base + 2] * scales[base + 2]};
  }
  return p;
}

Eigen::VectorXd pack(const CalibParams& p, const std::vector<double>& scales) {
  Eigen::VectorXd x(p.dim());
  x[0] = p.tau0_s / scales[0];
  for (int i = 0; i < 3; ++i) x[i + 1] = p.gain_coeffs[i] / scales[i + 1];
  for (std::size_t k = 0; k < p.module_offsets.size(); ++k) {
    const int base = 4 + 3 * static_cast<int>(k);
    x[base] = p.module_offsets[k].x / scales[base];
    x[base + 1] = p.module_offsets[k].y / scales[base + 1];
    x[base + 2] = p.module_offsets[k].z / scales[base + 2];
  }
  return x;
}

Eigen::VectorXd residuals(const CalibContext& ctx,
                          const CalibMeasurement& meas,
                          const std::vector<double>& window,
                          const CalibParams& theta) {
  const int n_res = 2 * meas.num_refs * meas.num_states;
  Eigen::VectorXd r(n_res);
  int idx = 0;
  for (int p = 0; p < meas.num_refs; ++p)
    for (int m = 0; m < meas.num_states; ++m) {
      std::complex<double> model{0.0, 0.0};
      for (int p2 = 0; p2 < meas.num_refs; ++p2)
        model += scatterer_bin_contribution(
            ctx, window, theta, ctx.references[p2], m, meas.bin(p, m));
      const std::complex<double> diff = meas.at(p, m) - model;
      r[idx++] = diff.real();
      r[idx++] = diff.imag();
    }
  return r;
}

/// Residual global delay relative to theta, from the unwrapped phase slope
/// of measured over modeled responses across the frequency states. A delay
/// many carrier cycles deep leaves no downhill path for the damped
/// Gauss-Newton iteration, but the state spacing samples the slope
/// unambiguously (adjacent-state increments stay well inside +/- pi).
double delay_slope_estimate(const CalibContext& ctx,
                            const CalibMeasurement& meas,
                            const std::vector<double>& window,
                            const CalibParams& theta) {
  // unwrapped phase of measured over modeled responses, per (ref, state)
  std::vector<double> freq(meas.num_states);
  std::vector<std::vector<double>> phase(meas.num_refs);
  double tau_sum = 0.0;
  int count = 0;
  for (int p = 0; p < meas.num_refs; ++p) {
    std::vector<double>& phi = phase[p];
    phi.assign(meas.num_states, 0.0);
    double prev = 0.0;
    bool ok = true;
    for (int m = 0; m < meas.num_states; ++m) {
      const StateContext sc = state_context(ctx, m);
      const std::complex<double> model = scatterer_bin_contribution(
          ctx, window, theta, ctx.references[p], m, meas.bin(p, m));
      const std::complex<double> ratio = meas.at(p, m) * std::conj(model);
      if (std::abs(ratio) <= 0.0) {
        ok = false;
        break;
      }
      double ph = std::arg(ratio);
      if (m > 0) {
        while (ph - prev > M_PI) ph -= kTwoPi;
        while (ph - prev < -M_PI) ph += kTwoPi;
      }
      prev = ph;
      freq[m] = sc.f_center_hz;
      phi[m] = ph;
    }
    if (!ok) {
      phi.clear();
      continue;
    }
    double f_mean = 0.0, p_mean = 0.0;
    for (int m = 0; m < meas.num_states; ++m) {
      f_mean += freq[m] / meas.num_states;
      p_mean += phi[m] / meas.num_states;
    }
    double cov = 0.0, var = 0.0;
    for (int m = 0; m < meas.num_states; ++m) {
      cov += (freq[m] - f_mean) * (phi[m] - p_mean);
      var += (freq[m] - f_mean) * (freq[m] - f_mean);
    }
    if (var <= 0.0) continue;
    tau_sum += -(cov / var) / kTwoPi;
    ++count;
  }
  if (count == 0) return 0.0;
  double tau = tau_sum / count;

  // The slope over the state span bounds tau only to a few carrier cycles'
  // worth of phase; snap the integer cycle count at each (ref, state) with
  // the coarse tau and refit against the absolute frequency, which tightens
  // the estimate by roughly f_center over the span.
  for (int pass = 0; pass < 2; ++pass) {
    double num = 0.0, den = 0.0;
    for (int p = 0; p < meas.num_refs; ++p) {
      if (phase[p].empty()) continue;
      for (int m = 0; m < meas.num_states; ++m) {
        const double cycles = phase[p][m] / kTwoPi;
        const double k = std::round(-freq[m] * tau - cycles);
        num += -freq[m] * (cycles + k);
        den += freq[m] * freq[m];
      }
    }
    if (den <= 0.0) break;
    tau = num / den;
  }
  return tau;
}
}  // namespace

void validate_references(const std::vector<ReferenceScatterer>& refs,
                         const FabricConfig& fabric) {
  if (refs.size() != 3)
    throw ConfigError("exactly three reference scatterers required");
  const Vec3 c = fabric.centroid();
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i].rcs_m2 <= 0.0)
      throw ConfigError("reference RCS must be > 0");
    for (std::size_t j = i + 1; j < refs.size(); ++j) {
      const Vec3 a = (refs[i].position - c).normalized();
      const Vec3 b = (refs[j].position - c).normalized();
      const double angle = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
      if (angle < 5.0 * M_PI / 180.0)
        throw ConfigError(
            "reference scatterers lack angular diversity (< 5 deg apart)");
    }
  }
}

std::complex<double> model_reference_response(const CalibContext& ctx,
                                              const CalibParams& theta, int p,
                                              int m) {
  const StateContext sc = state_context(ctx, m);
  const std::vector<double> window = make_window(ctx.window, sc.n_fast);
  // same bin the extraction would use: nearest to the nominal range
  const Vec3 x_nom = nominal_map(ctx.fabric, sc.f_center_hz);
  const double r_nom = (ctx.references[p].position - x_nom).norm();
  const double f_beat = 2.0 * sc.slope_hz_per_s * r_nom / kSpeedOfLight;
  const int k = static_cast<int>(
      std::lround(f_beat * sc.n_fft / sc.sample_rate_hz));
  return scatterer_bin_contribution(ctx, window, theta, ctx.references[p], m,
                                    k);
}

CalibMeasurement measure_references(const CalibContext& ctx,
                                    const RawDataCube& cube) {
  validate_references(ctx.references, ctx.fabric);
  const int num_states = ctx.schedule.num_states;
  const int num_refs = static_cast<int>(ctx.references.size());

  CalibMeasurement meas;
  meas.num_states = num_states;
  meas.num_refs = num_refs;
  meas.values.assign(static_cast<std::size_t>(num_refs) * num_states,
                     {0.0, 0.0});
  meas.bin_index.assign(meas.values.size(), 0);

  for (int m = 0; m < num_states; ++m) {
    const StateContext sc = state_context(ctx, m);
    const Vec3 x_nom = nominal_map(ctx.fabric, sc.f_center_hz);
    const double bin_width_m =
        kSpeedOfLight / (2.0 * sc.slope_hz_per_s * sc.n_fast /
                         sc.sample_rate_hz);

    std::vector<double> ranges(num_refs);
    for (int p = 0; p < num_refs; ++p)
      ranges[p] = (ctx.references[p].position - x_nom).norm();
    for (int p = 0; p < num_refs; ++p)
      for (int p2 = p + 1; p2 < num_refs; ++p2)
        if (std::abs(ranges[p] - ranges[p2]) < bin_width_m) {
          char msg[192];
          std::snprintf(msg, sizeof(msg),
                        "references %d and %d unresolvable at state %d: "
                        "ranges %.4g m and %.4g m within one %.4g m bin; use "
                        "finer chirp bandwidth or distinct ranges",
                        p, p2, m, ranges[p], ranges[p2], bin_width_m);
          throw ValidationError(msg);
        }

    const RangeProfile profile =
        range_profile(cube, m, 0, ctx.window, ctx.zero_pad);
    for (int p = 0; p < num_refs; ++p) {
      const double f_beat =
          2.0 * sc.slope_hz_per_s * ranges[p] / kSpeedOfLight;
      const int k = static_cast<int>(
          std::lround(f_beat * sc.n_fft / sc.sample_rate_hz));
      if (k < 0 || k >= static_cast<int>(profile.bins.size()))
        throw RuntimeFailure("reference beat frequency outside the profile");
      meas.at(p, m) = profile.bins[k];
      meas.bin_index[static_cast<std::size_t>(p) * num_states + m] = k;
    }
  }
  return meas;
}

double calibration_objective(const CalibContext& ctx,
                             const CalibMeasurement& measurement,
                             const CalibParams& theta) {
  const std::vector<double> window =
      make_window(ctx.window, ctx.schedule.fast_time_samples());
  return residuals(ctx, measurement, window, theta).squaredNorm();
}

FitReport fit_calibration(const CalibContext& ctx,
                          const CalibMeasurement& meas,
                          const CalibParams& theta_init) {
  const std::size_t num_modules = ctx.fabric.modules.size();
  const std::vector<double> scales = parameter_scales(num_modules);
  const std::vector<double> window =
      make_window(ctx.window, ctx.schedule.fast_time_samples());

  CalibParams init = theta_init;
  if (init.module_offsets.empty())
    init.module_offsets.assign(num_modules, Vec3{});

  // seed tau0 from the cross-state phase slope when that lowers the cost
  {
    CalibParams seeded = init;
    seeded.tau0_s += delay_slope_estimate(ctx, meas, window, init);
    if (residuals(ctx, meas, window, seeded).squaredNorm() <
        residuals(ctx, meas, window, init).squaredNorm())
      init = seeded;
  }

  FitReport report;
  report.identifiability_warning =
      2 * meas.num_refs * meas.num_states < 4 * init.dim();

  const int dim = init.dim();
  Eigen::VectorXd x = pack(init, scales);
  Eigen::VectorXd f = residuals(ctx, meas, window,
                                unpack(x, scales, num_modules));
  double obj = f.squaredNorm();
  report.residual_history.push_back(obj);

  constexpr double kFdStep = 1e-3;
  constexpr double kRelTol = 1e-8;
  constexpr double kStepTol = 1e-10;
  constexpr int kMaxIterations = 200;
  double lambda = 1e-3;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    Eigen::MatrixXd jac(f.size(), dim);
    for (int j = 0; j < dim; ++j) {
      Eigen::VectorXd xj = x;
      xj[j] += kFdStep;
      const Eigen::VectorXd fj =
          residuals(ctx, meas, window, unpack(xj, scales, num_modules));
      jac.col(j) = (fj - f) / kFdStep;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtf = jac.transpose() * f;

    bool accepted = false;
    while (lambda < 1e14) {
      Eigen::MatrixXd damped = jtj;
      for (int j = 0; j < dim; ++j)
        damped(j, j) += lambda * std::max(jtj(j, j), 1e-12);
      const Eigen::VectorXd step = damped.ldlt().solve(-jtf);
      const Eigen::VectorXd x_try = x + step;
      const Eigen::VectorXd f_try =
          residuals(ctx, meas, window, unpack(x_try, scales, num_modules));
      const double obj_try = f_try.squaredNorm();
      if (obj_try <= obj) {
        const double rel_decrease =
            (obj - obj_try) / std::max(obj, 1e-300);
        x = x_try;
        f = f_try;
        obj = obj_try;
        report.residual_history.push_back(obj);
        ++report.iterations;
        lambda = std::max(lambda * 0.3, 1e-12);
        accepted = true;
        if (rel_decrease < kRelTol || step.norm() < kStepTol)
          report.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) {
      report.diagnostic =
          "damping exhausted without an acceptable step (Jacobian "
          "rank-deficient or model inconsistent)";
      break;
    }
    if (report.converged) break;
  }
  if (!report.converged && report.diagnostic.empty())
    report.diagnostic = "iteration cap reached before convergence";
  report.theta_hat = unpack(x, scales, num_modules);
  return report;
}

RangeProfile normalize_state(const RangeProfile& profile,
                             const CalibParams& theta, const Band& band) {
  RangeProfile out = profile;
  const double phase = kTwoPi * profile.f_center_hz * theta.tau0_s;
  const double nu = band.normalized(profile.f_center_hz);
  const double gain = std::pow(10.0, theta.gain_db(nu) / 20.0);
  const std::complex<double> factor =
      std::complex<double>(std::cos(phase), std::sin(phase)) / gain;
  for (std::complex<double>& b : out.bins) b *= factor;
  out.noise_floor *= std::norm(factor);
  return out;
}

Vec3 calibrated_map(const CalibParams& theta, const FabricConfig& fabric,
                    double f_hz) {
  return perturbed_map(fabric, theta.as_perturbation(), f_hz);
}

void write_fit_report_json(const FitReport& report, std::ostream& out) {
  nlohmann::json j;
  j["theta"]["tau0_s"] = report.theta_hat.tau0_s;
  j["theta"]["gain_coeffs_db"] = report.theta_hat.gain_coeffs;
  auto& offsets = j["theta"]["module_offsets_m"];
  offsets = nlohmann::json::array();
  for (const Vec3& d : report.theta_hat.module_offsets)
    offsets.push_back({d.x, d.y, d.z});
  j["residual_history"] = report.residual_history;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["identifiability_warning"] = report.identifiability_warning;
  j["diagnostic"] = report.diagnostic;
  out << j.dump(2) << "\n";
}

void write_calibrated_mapping_csv(const CalibParams& theta,
                                  const FabricConfig& fabric,
                                  const std::vector<double>& frequencies_hz,
                                  std::ostream& out) {
  out << "f_hz,x_m,y_m,z_m\n";
  char line[160];
  for (double f : frequencies_hz) {
    const Vec3 x = calibrated_map(theta, fabric, f);
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g\n", f, x.x,
                  x.y, x.z);
    out << line;
  }
}

}  // namespace faacaf
