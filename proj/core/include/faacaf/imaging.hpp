#pragma once

#include <complex>
#include <functional>
#include <ostream>
#include <vector>

#include "faacaf/dsp.hpp"

namespace faacaf {

/// Planar imaging grid: points origin + u * (i * spacing) + v * (j * spacing).
struct ImagingGrid {
  Vec3 origin;
  Vec3 axis_u;
  Vec3 axis_v;
  int nu = 0;
  int nv = 0;
  double spacing_m = 0.0;

  void validate() const;
  Vec3 point(int i, int j) const {
    return origin + axis_u * (i * spacing_m) + axis_v * (j * spacing_m);
  }
  static ImagingGrid planar(const Vec3& origin, const Vec3& axis_u,
                            const Vec3& axis_v, double extent_u_m,
                            double extent_v_m, double spacing_m);
};

using PositionMap = std::function<Vec3(double f_center_hz)>;

struct FocusedImage {
  ImagingGrid grid;
  std::vector<std::complex<double>> values;  // row i, column j
  std::vector<int> states_used;

  std::complex<double> at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * grid.nv + j];
  }
};

/// Coherent near-field focusing: for each grid point p,
/// Z(p) = sum over usable states m of Y_m(r_m) * exp(+j 4 pi f_m r_m / c)
/// with r_m = |p - x(f_m)| and Y_m complex-interpolated on the range axis.
/// States accumulate in ascending m so results are bit-stable.
FocusedImage focus(const std::vector<RangeProfile>& profiles,
                   const PositionMap& map, const ImagingGrid& grid,
                   const UsableSet& usable);

struct ImageMetrics {
  Vec3 peak_position;
  double peak_magnitude = 0.0;
  double pslr_db = 0.0;     // peak over highest sidelobe, dB
  bool has_sidelobe = false;
  double width_3db_m = 0.0; // max extent of the -3 dB main-lobe region
};

ImageMetrics image_metrics(const FocusedImage& image);

double localization_error(const ImageMetrics& metrics,
                          const Vec3& true_position);

void write_image_csv(const FocusedImage& image, std::ostream& out);
/// 8-bit portable graymap of |Z| in dB over a 40 dB display span.
void write_image_pgm(const FocusedImage& image, std::ostream& out);
void write_metrics_json(const ImageMetrics& metrics, std::ostream& out);

}  // namespace faacaf
