#include "faacaf/fabric.hpp"

#include <cmath>
#include <cstdio>

namespace faacaf {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr int kNormalizationSamples = 4097;  // pinned; fixtures depend on it

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename T>
std::uint64_t fnv1a_value(std::uint64_t h, const T& v) {
  return fnv1a(h, &v, sizeof(v));
}
}  // namespace

double RippleProfile::raw(double f_hz) const {
  return amp1 * std::sin(kTwoPi * f_hz / period1_hz + phase1) +
         amp2 * std::sin(kTwoPi * f_hz / period2_hz + phase2);
}

double RippleProfile::normalization(const Band& band) const {
  double peak = 0.0;
  for (int i = 0; i < kNormalizationSamples; ++i) {
    const double f = band.f_lo_hz +
                     band.width_hz() * i / (kNormalizationSamples - 1);
    peak = std::max(peak, std::abs(raw(f)));
  }
  return peak;
}

double RippleProfile::eval(double f_hz, const Band& band) const {
  if (peak_db == 0.0) return 0.0;
  const double norm = normalization(band);
  if (norm == 0.0) return 0.0;
  return peak_db * raw(f_hz) / norm;
}

void ClipOnModule::validate() const {
  if (std::abs(axis.norm() - 1.0) > 1e-9)
    throw ConfigError("module axis must be a unit vector");
  if (aperture_length_m <= 0.0)
    throw ConfigError("module aperture length must be > 0");
  if (passband.f_hi_hz <= passband.f_lo_hz)
    throw ConfigError("module passband must have positive width");
  if (losses.coupling_db < 0.0 || losses.guided_wave_db < 0.0 ||
      losses.insertion_db < 0.0 || losses.ripple.peak_db < 0.0)
    throw ConfigError("loss components must be >= 0");
}

void FabricConfig::validate() const {
  if (modules.empty()) throw ConfigError("fabric needs at least one module");
  for (const ClipOnModule& m : modules) m.validate();
  for (std::size_t i = 0; i < modules.size(); ++i)
    for (std::size_t j = i + 1; j < modules.size(); ++j) {
      const Subband& a = modules[i].passband;
      const Subband& b = modules[j].passband;
      if (a.f_lo_hz < b.f_hi_hz && b.f_lo_hz < a.f_hi_hz)
        throw ConfigError("module passbands must be pairwise disjoint");
    }
}

Vec3 FabricConfig::centroid() const {
  Vec3 c;
  for (const ClipOnModule& m : modules) c += m.anchor;
  return c * (1.0 / static_cast<double>(modules.size()));
}

std::uint64_t FabricConfig::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a_value(h, trunk_feed_origin);
  for (const ClipOnModule& m : modules) {
    h = fnv1a_value(h, m.id);
    h = fnv1a_value(h, m.anchor);
    h = fnv1a_value(h, m.axis);
    h = fnv1a_value(h, m.aperture_length_m);
    h = fnv1a_value(h, m.passband.f_lo_hz);
    h = fnv1a_value(h, m.passband.f_hi_hz);
    h = fnv1a_value(h, m.losses.coupling_db);
    h = fnv1a_value(h, m.losses.guided_wave_db);
    h = fnv1a_value(h, m.losses.insertion_db);
    h = fnv1a_value(h, m.losses.ripple.peak_db);
  }
  return h;
}

void PerturbationState::validate(std::size_t num_modules,
                                 double max_offset_m) const {
  if (!module_offsets.empty() && module_offsets.size() != num_modules)
    throw ConfigError("module_offsets must match the module count");
  for (const Vec3& d : module_offsets)
    if (d.norm() > max_offset_m)
      throw ConfigError("module offset exceeds model validity bound");
}

double perturbation_gain_db(const PerturbationState& pert, const Band& band,
                            double f_hz) {
  return pert.gain_tilt_db * (band.normalized(f_hz) - 0.5);
}

std::optional<int> active_module(const FabricConfig& fabric, double f_hz) {
  for (std::size_t k = 0; k < fabric.modules.size(); ++k)
    if (fabric.modules[k].passband.contains(f_hz)) return static_cast<int>(k);
  return std::nullopt;
}

namespace {
const ClipOnModule& require_active(const FabricConfig& fabric, double f_hz) {
  const auto k = active_module(fabric, f_hz);
  if (!k) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "no active module at %.6g Hz", f_hz);
    throw RuntimeFailure(msg);
  }
  return fabric.modules[static_cast<std::size_t>(*k)];
}
}  // namespace

Vec3 nominal_map(const FabricConfig& fabric, double f_hz) {
  const ClipOnModule& mod = require_active(fabric, f_hz);
  const double frac =
      (f_hz - mod.passband.f_lo_hz) / mod.passband.width_hz();
  return mod.anchor + mod.axis * (mod.aperture_length_m * (frac - 0.5));
}

Vec3 perturbed_map(const FabricConfig& fabric, const PerturbationState& pert,
                   double f_hz) {
  const ClipOnModule& mod = require_active(fabric, f_hz);
  return nominal_map(fabric, f_hz) + pert.offset_of(mod.id);
}

double loss_at(const FabricConfig& fabric, double f_hz) {
  const ClipOnModule& mod = require_active(fabric, f_hz);
  const Band band{mod.passband.f_lo_hz, mod.passband.f_hi_hz};
  return mod.losses.fixed_db() + mod.losses.ripple.eval(f_hz, band);
}

void write_mapping_csv(const FabricConfig& fabric,
                       const std::vector<double>& frequencies_hz,
                       std::ostream& out) {
  out << "f_hz,x_m,y_m,z_m,module_id\n";
  char line[192];
  for (double f : frequencies_hz) {
    const Vec3 x = nominal_map(fabric, f);
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%d\n", f, x.x,
                  x.y, x.z, *active_module(fabric, f));
    out << line;
  }
}

}  // namespace faacaf
