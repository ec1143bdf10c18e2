#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "spadcorr/geometry.hpp"

namespace spadcorr {

/// Per-pixel real-valued map over the full sensor (transmission or probability).
class PixelMap {
 public:
  PixelMap() = default;
  PixelMap(int width, int height, float fill);

  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }
  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] float at(ArrayPixel p) const {
    return values_[static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(p.col)];
  }
  [[nodiscard]] float& at(ArrayPixel p) {
    return values_[static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(p.col)];
  }
  [[nodiscard]] const std::vector<float>& values() const noexcept { return values_; }
  [[nodiscard]] std::vector<float>& values() noexcept { return values_; }

  bool operator==(const PixelMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> values_;
};

/// Uniform disk of the given radius (pixels) centred on the origin.
struct DiskIllumination {
  double radius = 0.0;
};

/// Rotationally symmetric ring: radial density exp(-(rho - radius)^2 / (2 thickness^2)).
struct RingIllumination {
  double radius = 0.0;
  double thickness = 0.0;
};

using Illumination = std::variant<DiskIllumination, RingIllumination>;

/// Full generative model of one acquisition.
struct SceneConfig {
  /// Expected pairs per exposure (per frame, not per laser pulse).
  double mean_pairs_per_frame = 1.0;
  double detection_efficiency = 0.1;
  /// Std of each component of r1 + r2, pixels.
  double correlation_width = 1.0;
  /// Optional off-axis broadening: sigma(r1) = correlation_width + psf_broadening * |r1|.
  double psf_broadening = 0.0;
  Illumination illumination = DiskIllumination{20.0};
  /// Per-pixel transmission T(r) in [0,1]; empty means fully transparent.
  PixelMap object_mask;
  double dark_count_prob = 0.0;
  /// Per-pixel per-frame detection probability of classical light; empty means none.
  PixelMap stray_light;
  double crosstalk_prob = 0.0;
  double hot_pixel_fraction = 0.0;
  /// Output depth of the simulated frames, 1 or 8.
  int bit_depth = 8;
};

/// Throws ConfigError on invalid values or maps whose size differs from the
/// sensor. Returns warnings (e.g. expected occupancy above 0.1 somewhere).
std::vector<std::string> validate(const SceneConfig& config, const SensorGeometry& geometry);

/// Probability density of the illumination at a centred position (per pixel^2).
double illumination_density(const Illumination& illumination, double x, double y);

/// Radius beyond which the illumination density is negligible.
double illumination_extent(const Illumination& illumination);

/// Effective number of illuminated pixels: (sum of density)^2 / sum of density^2,
/// which is pi R^2 for a uniform disk.
double illuminated_pixel_count(const Illumination& illumination);

/// Transmission at a centred position; 1 for an empty mask or off-sensor points.
double transmission(const SceneConfig& config, const SensorGeometry& geometry, PixelCoord p);

/// Expected per-frame occupancy <I(r)> of every sensor pixel (before hot pixels
/// and crosstalk), row-major over the full sensor.
std::vector<double> expected_occupancy(const SceneConfig& config, const SensorGeometry& geometry);

/// Opaque half-plane: T = 0 where the coordinate along `axis` ('x' or 'y') is
/// >= edge (or <= edge when `negative_side`), T = 1 elsewhere.
PixelMap make_half_plane_mask(const SensorGeometry& geometry, char axis, int edge,
                              bool negative_side = false);

/// Uniform probability `prob` over an array-coordinate rectangle, zero elsewhere.
PixelMap make_rect_map(const SensorGeometry& geometry, Roi rect, float prob);

}  // namespace spadcorr
