#include "spadcorr/frame.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "spadcorr/errors.hpp"

namespace spadcorr {

FrameBuffer::FrameBuffer(SensorGeometry geometry, int bit_depth, std::uint64_t frame_index)
    : geometry_(geometry), bit_depth_(bit_depth), frame_index_(frame_index),
      values_(geometry.pixel_count(), 0) {
  if (bit_depth != 1 && bit_depth != 8) throw ConfigError("bit depth must be 1 or 8");
}

void FrameBuffer::set(ArrayPixel p, std::uint8_t value) {
  if (!geometry_.in_sensor(p)) throw OutOfRangeError("pixel outside the sensor");
  if (value > max_value()) throw OutOfRangeError("value exceeds the frame bit depth");
  values_[geometry_.sensor_index(p)] = value;
}

void FrameBuffer::clear() noexcept { std::fill(values_.begin(), values_.end(), std::uint8_t{0}); }

bool FrameBuffer::is_binary() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](std::uint8_t v) { return v <= 1; });
}

std::size_t FrameBuffer::count_nonzero() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](std::uint8_t v) { return v != 0; }));
}

void collect_active_roi(const FrameBuffer& frame, std::vector<std::uint32_t>& out) {
  const auto& g = frame.geometry();
  const Roi& roi = g.roi();
  const auto values = frame.values();
  const auto w = static_cast<std::size_t>(roi.width);
  for (int row = 0; row < roi.height; ++row) {
    const std::uint8_t* line =
        values.data() + g.sensor_index(ArrayPixel{roi.col0, roi.row0 + row});
    const auto base = static_cast<std::uint32_t>(static_cast<std::size_t>(row) * w);
    std::size_t col = 0;
    // Frames are sparse: skip zero bytes eight at a time.
    for (; std::endian::native == std::endian::little && col + 8 <= w; col += 8) {
      std::uint64_t word;
      std::memcpy(&word, line + col, sizeof word);
      while (word != 0) {
        const int byte = std::countr_zero(word) / 8;
        out.push_back(base + static_cast<std::uint32_t>(col) + static_cast<std::uint32_t>(byte));
        word &= ~(std::uint64_t{0xff} << (8 * byte));
      }
    }
    for (; col < w; ++col) {
      if (line[col] != 0) out.push_back(base + static_cast<std::uint32_t>(col));
    }
  }
}

}  // namespace spadcorr
