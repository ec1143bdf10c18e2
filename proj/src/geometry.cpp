#include "spadcorr/geometry.hpp"

#include <algorithm>

#include "spadcorr/errors.hpp"

namespace spadcorr {

std::string to_string(PixelCoord p) {
  return "(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")";
}

SensorGeometry::SensorGeometry(int width, int height, ArrayPixel origin, Roi roi)
    : width_(width), height_(height), origin_(origin), roi_(roi) {
  if (width < 2 || height < 2 || width > 65535 || height > 65535) {
    throw ConfigError("sensor must be between 2x2 and 65535x65535 pixels");
  }
  if (!in_sensor(origin)) throw ConfigError("origin lies outside the sensor");
  if (roi.width < 1 || roi.height < 1 || roi.col0 < 0 || roi.row0 < 0 ||
      roi.col0 + roi.width > width || roi.row0 + roi.height > height) {
    throw ConfigError("roi must lie entirely within the sensor");
  }
  // -r in roi for every r in roi <=> roi centred on the origin pixel.
  if (2 * origin.col != 2 * roi.col0 + roi.width - 1 ||
      2 * origin.row != 2 * roi.row0 + roi.height - 1) {
    throw ConfigError("roi must be point-symmetric about the origin (odd extents centred on it)");
  }
}

SensorGeometry SensorGeometry::centered(int width, int height) {
  const ArrayPixel origin{width / 2, height / 2};
  const int hw = std::min(origin.col, width - 1 - origin.col);
  const int hh = std::min(origin.row, height - 1 - origin.row);
  return centered(width, height, hw, hh);
}

SensorGeometry SensorGeometry::centered(int width, int height, int half_width, int half_height) {
  const ArrayPixel origin{width / 2, height / 2};
  return SensorGeometry(width, height, origin,
                        Roi{origin.col - half_width, origin.row - half_height, 2 * half_width + 1,
                            2 * half_height + 1});
}

PixelCoord SensorGeometry::mirror(PixelCoord r) const {
  const PixelCoord m = -r;
  if (!in_sensor(m)) throw OutOfRangeError("mirror of " + to_string(r) + " lies outside the sensor");
  return m;
}

ArrayPixel SensorGeometry::mirror(ArrayPixel p) const {
  const ArrayPixel m{2 * origin_.col - p.col, 2 * origin_.row - p.row};
  if (!in_sensor(m)) {
    throw OutOfRangeError("mirror of array pixel (" + std::to_string(p.col) + "," +
                          std::to_string(p.row) + ") lies outside the sensor");
  }
  return m;
}

PixelCoord mirror_pixel(PixelCoord r, const SensorGeometry& geometry) { return geometry.mirror(r); }

}  // namespace spadcorr
