#include "spadcorr/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spadcorr/errors.hpp"

namespace spadcorr {

PixelMap::PixelMap(int width, int height, float fill)
    : width_(width), height_(height),
      values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

namespace {

void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0,1]");
  }
}

void require_map(const PixelMap& map, const SensorGeometry& geometry, const char* name) {
  if (map.empty()) return;
  if (map.width() != geometry.width() || map.height() != geometry.height()) {
    throw ConfigError(std::string(name) + " size does not match the sensor");
  }
  for (float v : map.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ConfigError(std::string(name) + " values must lie in [0,1]");
  }
}

double ring_normalisation(const RingIllumination& ring) {
  const double r = ring.radius;
  const double w = ring.thickness;
  const double phi = 0.5 * std::erfc(-r / (w * std::numbers::sqrt2));
  return 2.0 * std::numbers::pi *
         (w * w * std::exp(-r * r / (2 * w * w)) + r * w * std::sqrt(2 * std::numbers::pi) * phi);
}

}  // namespace

std::vector<std::string> validate(const SceneConfig& config, const SensorGeometry& geometry) {
  if (!(config.mean_pairs_per_frame > 0.0)) throw ConfigError("mean_pairs_per_frame must be > 0");
  require_probability(config.detection_efficiency, "detection_efficiency");
  if (!(config.correlation_width > 0.0)) throw ConfigError("correlation_width must be > 0");
  if (!(config.psf_broadening >= 0.0)) throw ConfigError("psf_broadening must be >= 0");
  require_probability(config.dark_count_prob, "dark_count_prob");
  require_probability(config.crosstalk_prob, "crosstalk_prob");
  require_probability(config.hot_pixel_fraction, "hot_pixel_fraction");
  if (config.bit_depth != 1 && config.bit_depth != 8) throw ConfigError("bit_depth must be 1 or 8");
  std::visit(
      [](const auto& ill) {
        using T = std::decay_t<decltype(ill)>;
        if (!(ill.radius > 0.0)) throw ConfigError("illumination radius must be > 0");
        if constexpr (std::is_same_v<T, RingIllumination>) {
          if (!(ill.thickness > 0.0)) throw ConfigError("ring thickness must be > 0");
        }
      },
      config.illumination);
  require_map(config.object_mask, geometry, "object_mask");
  require_map(config.stray_light, geometry, "stray_light");

  std::vector<std::string> warnings;
  const auto occupancy = expected_occupancy(config, geometry);
  const auto worst = std::max_element(occupancy.begin(), occupancy.end());
  if (worst != occupancy.end() && *worst > 0.1) {
    std::ostringstream msg;
    msg << "expected occupancy reaches " << *worst
        << " (> 0.1); the <I> << 1 approximation behind the estimator degrades";
    warnings.push_back(msg.str());
  }
  const double extent = illumination_extent(config.illumination);
  if (extent > geometry.half_width() || extent > geometry.half_height()) {
    warnings.push_back("illumination extends beyond the roi; photons outside it are ignored by the correlator");
  }
  return warnings;
}

double illumination_density(const Illumination& illumination, double x, double y) {
  const double rho2 = x * x + y * y;
  return std::visit(
      [rho2](const auto& ill) -> double {
        using T = std::decay_t<decltype(ill)>;
        if constexpr (std::is_same_v<T, DiskIllumination>) {
          return rho2 <= ill.radius * ill.radius ? 1.0 / (std::numbers::pi * ill.radius * ill.radius)
                                                 : 0.0;
        } else {
          const double d = std::sqrt(rho2) - ill.radius;
          return std::exp(-d * d / (2 * ill.thickness * ill.thickness)) / ring_normalisation(ill);
        }
      },
      illumination);
}

double illumination_extent(const Illumination& illumination) {
  return std::visit(
      [](const auto& ill) -> double {
        using T = std::decay_t<decltype(ill)>;
        if constexpr (std::is_same_v<T, DiskIllumination>) {
          return ill.radius;
        } else {
          return ill.radius + 4.0 * ill.thickness;
        }
      },
      illumination);
}

double illuminated_pixel_count(const Illumination& illumination) {
  return std::visit(
      [](const auto& ill) -> double {
        using T = std::decay_t<decltype(ill)>;
        if constexpr (std::is_same_v<T, DiskIllumination>) {
          return std::numbers::pi * ill.radius * ill.radius;
        } else {
          // (int f dA)^2 / int f^2 dA with f normalised: 1 / int f^2 dA.
          const double hi = ill.radius + 8.0 * ill.thickness;
          const int steps = 20000;
          const double h = hi / steps;
          double acc = 0.0;
          for (int i = 0; i < steps; ++i) {
            const double rho = (i + 0.5) * h;
            const double f = illumination_density(ill, rho, 0.0);
            acc += 2.0 * std::numbers::pi * rho * f * f * h;
          }
          return 1.0 / acc;
        }
      },
      illumination);
}

double transmission(const SceneConfig& config, const SensorGeometry& geometry, PixelCoord p) {
  if (config.object_mask.empty()) return 1.0;
  const ArrayPixel a = geometry.to_array(p);
  if (!geometry.in_sensor(a)) return 1.0;
  return config.object_mask.at(a);
}

std::vector<double> expected_occupancy(const SceneConfig& config, const SensorGeometry& geometry) {
  std::vector<double> out(geometry.pixel_count());
  const double m = config.mean_pairs_per_frame;
  const double eta = config.detection_efficiency;
  for (int row = 0; row < geometry.height(); ++row) {
    for (int col = 0; col < geometry.width(); ++col) {
      const ArrayPixel a{col, row};
      const PixelCoord r = geometry.to_centered(a);
      const double t = transmission(config, geometry, r);
      // photon 1 lands at r with density f(r); photon 2 with density ~ f(-r) = f(r).
      const double f = illumination_density(config.illumination, r.x, r.y);
      const double lambda = 2.0 * m * eta * t * f;
      const double stray = config.stray_light.empty() ? 0.0 : config.stray_light.at(a);
      out[geometry.sensor_index(a)] =
          1.0 - std::exp(-lambda) * (1.0 - config.dark_count_prob) * (1.0 - stray);
    }
  }
  return out;
}

PixelMap make_half_plane_mask(const SensorGeometry& geometry, char axis, int edge, bool negative_side) {
  if (axis != 'x' && axis != 'y') throw ConfigError("half-plane axis must be 'x' or 'y'");
  PixelMap map(geometry.width(), geometry.height(), 1.0f);
  for (int row = 0; row < geometry.height(); ++row) {
    for (int col = 0; col < geometry.width(); ++col) {
      const PixelCoord r = geometry.to_centered({col, row});
      const int c = axis == 'x' ? r.x : r.y;
      const bool opaque = negative_side ? c <= edge : c >= edge;
      if (opaque) map.at({col, row}) = 0.0f;
    }
  }
  return map;
}

PixelMap make_rect_map(const SensorGeometry& geometry, Roi rect, float prob) {
  PixelMap map(geometry.width(), geometry.height(), 0.0f);
  for (int row = std::max(0, rect.row0); row < std::min(geometry.height(), rect.row0 + rect.height); ++row) {
    for (int col = std::max(0, rect.col0); col < std::min(geometry.width(), rect.col0 + rect.width); ++col) {
      map.at({col, row}) = prob;
    }
  }
  return map;
}

}  // namespace spadcorr
