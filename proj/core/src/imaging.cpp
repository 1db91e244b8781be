#include "faacaf/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#include "json.hpp"

namespace faacaf {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void ImagingGrid::validate() const {
  if (spacing_m <= 0.0) throw ConfigError("grid spacing must be > 0");
  if (nu < 1 || nv < 1) throw ConfigError("grid must have at least one point");
  if (std::abs(axis_u.norm() - 1.0) > 1e-9 ||
      std::abs(axis_v.norm() - 1.0) > 1e-9 ||
      std::abs(axis_u.dot(axis_v)) > 1e-9)
    throw ConfigError("grid axes must be orthonormal");
}

ImagingGrid ImagingGrid::planar(const Vec3& origin, const Vec3& axis_u,
                                const Vec3& axis_v, double extent_u_m,
                                double extent_v_m, double spacing_m) {
  ImagingGrid grid;
  grid.origin = origin;
  grid.axis_u = axis_u;
  grid.axis_v = axis_v;
  grid.spacing_m = spacing_m;
  grid.nu = static_cast<int>(std::floor(extent_u_m / spacing_m + 0.5)) + 1;
  grid.nv = static_cast<int>(std::floor(extent_v_m / spacing_m + 0.5)) + 1;
  grid.validate();
  return grid;
}

FocusedImage focus(const std::vector<RangeProfile>& profiles,
                   const PositionMap& map, const ImagingGrid& grid,
                   const UsableSet& usable) {
  grid.validate();
  if (usable.states.empty())
    throw RuntimeFailure("no usable frequency states");
  for (int m : usable.states)
    if (m < 0 || m >= static_cast<int>(profiles.size()))
      throw RuntimeFailure("usable state without a matching profile");

  std::vector<int> states = usable.states;
  std::sort(states.begin(), states.end());

  // precompute per-state virtual sample positions
  std::vector<Vec3> sample_pos(states.size());
  for (std::size_t s = 0; s < states.size(); ++s)
    sample_pos[s] = map(profiles[states[s]].f_center_hz);

  FocusedImage image;
  image.grid = grid;
  image.states_used = states;
  image.values.assign(static_cast<std::size_t>(grid.nu) * grid.nv,
                      {0.0, 0.0});

  for (int i = 0; i < grid.nu; ++i) {
    for (int j = 0; j < grid.nv; ++j) {
      const Vec3 p = grid.point(i, j);
      std::complex<double> z{0.0, 0.0};
      for (std::size_t s = 0; s < states.size(); ++s) {
        const RangeProfile& profile = profiles[states[s]];
        const double r = (p - sample_pos[s]).norm();
        const std::complex<double> y = profile.interp(r);
        const double phase =
            2.0 * kTwoPi * profile.f_center_hz * r / kSpeedOfLight;
        z += y * std::complex<double>(std::cos(phase), std::sin(phase));
      }
      image.values[static_cast<std::size_t>(i) * grid.nv + j] = z;
    }
  }
  return image;
}

ImageMetrics image_metrics(const FocusedImage& image) {
  const ImagingGrid& grid = image.grid;
  const int nu = grid.nu, nv = grid.nv;
  const auto mag = [&](int i, int j) { return std::abs(image.at(i, j)); };

  int pi = 0, pj = 0;
  double peak = 0.0;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      if (mag(i, j) > peak) {
        peak = mag(i, j);
        pi = i;
        pj = j;
      }
  if (peak == 0.0) throw RuntimeFailure("image is identically zero");

  // -3 dB main-lobe region, 4-connected around the peak
  const double cut = peak / std::sqrt(2.0);
  std::vector<char> in_lobe(static_cast<std::size_t>(nu) * nv, 0);
  std::queue<std::pair<int, int>> frontier;
  frontier.push({pi, pj});
  in_lobe[static_cast<std::size_t>(pi) * nv + pj] = 1;
  std::vector<std::pair<int, int>> lobe;
  while (!frontier.empty()) {
    const auto [i, j] = frontier.front();
    frontier.pop();
    lobe.push_back({i, j});
    const int di[] = {1, -1, 0, 0};
    const int dj[] = {0, 0, 1, -1};
    for (int d = 0; d < 4; ++d) {
      const int ni = i + di[d], nj = j + dj[d];
      if (ni < 0 || ni >= nu || nj < 0 || nj >= nv) continue;
      auto& flag = in_lobe[static_cast<std::size_t>(ni) * nv + nj];
      if (!flag && mag(ni, nj) >= cut) {
        flag = 1;
        frontier.push({ni, nj});
      }
    }
  }

  // diameter of the lobe; extreme points per row suffice
  std::vector<std::pair<int, int>> row_extent(nu, {nv, -1});
  for (const auto& [i, j] : lobe) {
    row_extent[i].first = std::min(row_extent[i].first, j);
    row_extent[i].second = std::max(row_extent[i].second, j);
  }
  std::vector<std::pair<int, int>> extremes;
  for (int i = 0; i < nu; ++i) {
    if (row_extent[i].second < 0) continue;
    extremes.push_back({i, row_extent[i].first});
    if (row_extent[i].second != row_extent[i].first)
      extremes.push_back({i, row_extent[i].second});
  }
  double width = 0.0;
  for (std::size_t a = 0; a < extremes.size(); ++a)
    for (std::size_t b = a + 1; b < extremes.size(); ++b) {
      const Vec3 pa = grid.point(extremes[a].first, extremes[a].second);
      const Vec3 pb = grid.point(extremes[b].first, extremes[b].second);
      width = std::max(width, (pa - pb).norm());
    }

  // highest local maximum outside the main lobe
  double best_side = 0.0;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      if (in_lobe[static_cast<std::size_t>(i) * nv + j]) continue;
      const double v = mag(i, j);
      bool is_max = true;
      const int di[] = {1, -1, 0, 0};
      const int dj[] = {0, 0, 1, -1};
      for (int d = 0; d < 4 && is_max; ++d) {
        const int ni = i + di[d], nj = j + dj[d];
        if (ni < 0 || ni >= nu || nj < 0 || nj >= nv) continue;
        if (mag(ni, nj) > v) is_max = false;
      }
      if (is_max) best_side = std::max(best_side, v);
    }

  ImageMetrics metrics;
  metrics.peak_position = grid.point(pi, pj);
  metrics.peak_magnitude = peak;
  metrics.has_sidelobe = best_side > 0.0;
  metrics.pslr_db =
      metrics.has_sidelobe ? 20.0 * std::log10(peak / best_side) : 0.0;
  metrics.width_3db_m = width;
  return metrics;
}

double localization_error(const ImageMetrics& metrics,
                          const Vec3& true_position) {
  return (metrics.peak_position - true_position).norm();
}

void write_image_csv(const FocusedImage& image, std::ostream& out) {
  out << "x_m,y_m,z_m,real,imag,magnitude_db\n";
  char line[224];
  for (int i = 0; i < image.grid.nu; ++i)
    for (int j = 0; j < image.grid.nv; ++j) {
      const Vec3 p = image.grid.point(i, j);
      const std::complex<double> z = image.at(i, j);
      const double mag_db =
          10.0 * std::log10(std::max(std::norm(z), 1e-300));
      std::snprintf(line, sizeof(line),
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.x, p.y, p.z,
                    z.real(), z.imag(), mag_db);
      out << line;
    }
}

void write_image_pgm(const FocusedImage& image, std::ostream& out) {
  constexpr double kSpanDb = 40.0;
  double peak = 0.0;
  for (const std::complex<double>& z : image.values)
    peak = std::max(peak, std::abs(z));
  if (peak == 0.0) peak = 1.0;

  out << "P2\n" << image.grid.nv << " " << image.grid.nu << "\n255\n";
  for (int i = 0; i < image.grid.nu; ++i) {
    for (int j = 0; j < image.grid.nv; ++j) {
      const double mag = std::abs(image.at(i, j));
      const double db = 20.0 * std::log10(std::max(mag / peak, 1e-12));
      const int level = static_cast<int>(
          std::clamp(255.0 * (1.0 + db / kSpanDb), 0.0, 255.0));
      out << level << (j + 1 == image.grid.nv ? '\n' : ' ');
    }
  }
}

void write_metrics_json(const ImageMetrics& metrics, std::ostream& out) {
  nlohmann::json j;
  j["peak_position_m"] = {metrics.peak_position.x, metrics.peak_position.y,
                          metrics.peak_position.z};
  j["peak_magnitude"] = metrics.peak_magnitude;
  j["pslr_db"] = metrics.pslr_db;
  j["has_sidelobe"] = metrics.has_sidelobe;
  j["width_3db_m"] = metrics.width_3db_m;
  out << j.dump(2) << "\n";
}

}  // namespace faacaf
