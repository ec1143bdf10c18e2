#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace spadcorr {

/// Pixel position relative to the symmetry origin (x to the right, y down).
struct PixelCoord {
  int x = 0;
  int y = 0;

  constexpr PixelCoord operator-() const noexcept { return {-x, -y}; }
  constexpr PixelCoord operator+(PixelCoord o) const noexcept { return {x + o.x, y + o.y}; }
  constexpr PixelCoord operator-(PixelCoord o) const noexcept { return {x - o.x, y - o.y}; }
  constexpr bool operator==(const PixelCoord&) const noexcept = default;
};

/// Column/row position in the sensor array, (0,0) is the first stored pixel.
struct ArrayPixel {
  int col = 0;
  int row = 0;

  constexpr bool operator==(const ArrayPixel&) const noexcept = default;
};

/// Axis-aligned rectangle in array coordinates.
struct Roi {
  int col0 = 0;
  int row0 = 0;
  int width = 0;
  int height = 0;

  constexpr bool operator==(const Roi&) const noexcept = default;
};

std::string to_string(PixelCoord p);

/// Sensor dimensions, symmetry origin and region of interest.
///
/// Every pixel of the ROI has its point reflection about the origin inside the
/// ROI as well; construction rejects anything else. Since the origin lies on a
/// pixel centre, symmetric ROIs always have odd width and height.
class SensorGeometry {
 public:
  SensorGeometry(int width, int height, ArrayPixel origin, Roi roi);

  /// Origin at (width/2, height/2) and the largest symmetric ROI.
  static SensorGeometry centered(int width, int height);
  /// Origin at (width/2, height/2) and a symmetric ROI of half-extent `half`.
  static SensorGeometry centered(int width, int height, int half_width, int half_height);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  [[nodiscard]] ArrayPixel origin() const noexcept { return origin_; }
  [[nodiscard]] const Roi& roi() const noexcept { return roi_; }
  [[nodiscard]] std::size_t roi_size() const noexcept {
    return static_cast<std::size_t>(roi_.width) * static_cast<std::size_t>(roi_.height);
  }
  /// Half extents of the ROI: it spans x in [-half_width, half_width].
  [[nodiscard]] int half_width() const noexcept { return roi_.width / 2; }
  [[nodiscard]] int half_height() const noexcept { return roi_.height / 2; }

  [[nodiscard]] PixelCoord to_centered(ArrayPixel p) const noexcept {
    return {p.col - origin_.col, p.row - origin_.row};
  }
  [[nodiscard]] ArrayPixel to_array(PixelCoord p) const noexcept {
    return {p.x + origin_.col, p.y + origin_.row};
  }

  [[nodiscard]] bool in_sensor(ArrayPixel p) const noexcept {
    return p.col >= 0 && p.row >= 0 && p.col < width_ && p.row < height_;
  }
  [[nodiscard]] bool in_sensor(PixelCoord p) const noexcept { return in_sensor(to_array(p)); }
  [[nodiscard]] bool in_roi(PixelCoord p) const noexcept {
    return p.x >= -half_width() && p.x <= half_width() && p.y >= -half_height() &&
           p.y <= half_height();
  }

  /// Flat index into the full sensor, row-major.
  [[nodiscard]] std::size_t sensor_index(ArrayPixel p) const noexcept {
    return static_cast<std::size_t>(p.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(p.col);
  }
  [[nodiscard]] std::size_t sensor_index(PixelCoord p) const noexcept {
    return sensor_index(to_array(p));
  }

  /// Flat index into the ROI, row-major. Requires in_roi(p).
  [[nodiscard]] std::size_t roi_index(PixelCoord p) const noexcept {
    return static_cast<std::size_t>(p.y + half_height()) * static_cast<std::size_t>(roi_.width) +
           static_cast<std::size_t>(p.x + half_width());
  }
  [[nodiscard]] PixelCoord roi_coord(std::size_t index) const noexcept {
    const auto w = static_cast<std::size_t>(roi_.width);
    return {static_cast<int>(index % w) - half_width(), static_cast<int>(index / w) - half_height()};
  }
  /// Index of -r for ROI index i; always valid for a symmetric ROI.
  [[nodiscard]] std::size_t roi_mirror_index(std::size_t index) const noexcept {
    return roi_size() - 1 - index;
  }

  /// Point reflection about the origin. Throws OutOfRangeError if -r is off-sensor.
  [[nodiscard]] PixelCoord mirror(PixelCoord r) const;
  /// Point reflection in array coordinates: 2 * origin - p.
  [[nodiscard]] ArrayPixel mirror(ArrayPixel p) const;

  bool operator==(const SensorGeometry&) const noexcept = default;

 private:
  int width_;
  int height_;
  ArrayPixel origin_;
  Roi roi_;
};

/// Point reflection of a centred coordinate; always -r.
constexpr PixelCoord mirror_pixel(PixelCoord r) noexcept { return -r; }

/// Checked point reflection about the geometry's origin.
PixelCoord mirror_pixel(PixelCoord r, const SensorGeometry& geometry);

}  // namespace spadcorr
