#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spadcorr/frame.hpp"

namespace spadcorr {

inline constexpr int kDefaultHotThreshold = 200;

/// Pixels flagged as permanently firing, with the calibration that produced them.
struct HotPixelMap {
  int width = 0;
  int height = 0;
  int threshold = kDefaultHotThreshold;
  std::uint64_t calibration_frames = 0;
  std::vector<std::uint32_t> pixels;  // sorted sensor indices

  [[nodiscard]] bool empty() const noexcept { return pixels.empty(); }
  [[nodiscard]] bool contains(std::uint32_t sensor_index) const;
  [[nodiscard]] double flagged_fraction() const noexcept;

  bool operator==(const HotPixelMap&) const = default;
};

/// Streaming calibration: a pixel is hot iff it exceeds `threshold` (strictly)
/// in any dark frame. Frames must be 8-bit.
class HotPixelCalibrator {
 public:
  HotPixelCalibrator(int width, int height, int threshold = kDefaultHotThreshold);
  void add(const FrameBuffer& dark_frame);
  [[nodiscard]] HotPixelMap result() const;

 private:
  int width_;
  int height_;
  int threshold_;
  std::uint64_t frames_ = 0;
  std::vector<std::uint8_t> flagged_;
};

HotPixelMap calibrate_hot_pixels(std::span<const FrameBuffer> dark_frames,
                                 int threshold = kDefaultHotThreshold);

/// Zeroes flagged pixels, then clamps to {0,1}. The result is a 1-bit frame.
/// An empty map with zero dimensions applies to any geometry.
FrameBuffer preprocess(const FrameBuffer& frame, const HotPixelMap& map);
/// In-place variant writing into a 1-bit `out` with the same geometry.
void preprocess_into(const FrameBuffer& frame, const HotPixelMap& map, FrameBuffer& out);

void save_hot_pixel_map(const std::filesystem::path& path, const HotPixelMap& map);
HotPixelMap load_hot_pixel_map(const std::filesystem::path& path);

}  // namespace spadcorr
