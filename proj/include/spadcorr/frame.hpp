#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spadcorr/geometry.hpp"

namespace spadcorr {

/// One camera exposure: a dense grid of small nonnegative counts.
///
/// Values are stored one byte per pixel regardless of bit depth; the bit depth
/// only bounds them (1 -> {0,1}, 8 -> [0,255]).
class FrameBuffer {
 public:
  FrameBuffer(SensorGeometry geometry, int bit_depth, std::uint64_t frame_index = 0);

  [[nodiscard]] const SensorGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] int bit_depth() const noexcept { return bit_depth_; }
  [[nodiscard]] std::uint8_t max_value() const noexcept { return bit_depth_ == 1 ? 1 : 255; }
  [[nodiscard]] std::uint64_t frame_index() const noexcept { return frame_index_; }
  void set_frame_index(std::uint64_t index) noexcept { frame_index_ = index; }

  [[nodiscard]] std::uint8_t at(ArrayPixel p) const { return values_[geometry_.sensor_index(p)]; }
  [[nodiscard]] std::uint8_t at(PixelCoord p) const { return values_[geometry_.sensor_index(p)]; }
  /// Stores `value`; throws OutOfRangeError when the pixel is off-sensor or the
  /// value exceeds the bit depth.
  void set(ArrayPixel p, std::uint8_t value);
  void set(PixelCoord p, std::uint8_t value) { set(geometry_.to_array(p), value); }

  /// Adds one count, saturating at the bit depth's maximum (logical OR at 1 bit).
  void increment(std::size_t sensor_index) noexcept {
    auto& v = values_[sensor_index];
    if (v < max_value()) ++v;
  }

  void clear() noexcept;

  [[nodiscard]] std::span<const std::uint8_t> values() const noexcept { return values_; }
  [[nodiscard]] std::span<std::uint8_t> mutable_values() noexcept { return values_; }

  [[nodiscard]] bool is_binary() const noexcept;
  [[nodiscard]] std::size_t count_nonzero() const noexcept;

  bool operator==(const FrameBuffer&) const = default;

 private:
  SensorGeometry geometry_;
  int bit_depth_;
  std::uint64_t frame_index_;
  std::vector<std::uint8_t> values_;
};

/// Appends the ROI indices of all nonzero pixels of `frame`, in increasing order.
void collect_active_roi(const FrameBuffer& frame, std::vector<std::uint32_t>& out);

}  // namespace spadcorr
