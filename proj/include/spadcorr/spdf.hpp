#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <vector>

#include "spadcorr/frame.hpp"

namespace spadcorr {

/// SPDF container header. Layout (little-endian, packed, 35 bytes):
///
///   offset  size  field
///        0     4  magic "SPDF"
///        4     2  format_version (currently 1)
///        6     2  width
///        8     2  height
///       10     8  frame_count
///       18     1  bit_depth (1 or 8)
///       19    16  reserved, zero
///
/// The payload follows immediately: frame_count frames of frame_stride() bytes.
/// 1-bit frames are row-major, each row padded to whole bytes, pixel x of a row
/// stored in bit (x % 8) of byte (x / 8) (LSB first). 8-bit frames are one byte
/// per pixel, row-major.
struct FrameFileHeader {
  static constexpr std::size_t kSize = 35;
  static constexpr std::uint16_t kVersion = 1;

  std::uint16_t format_version = kVersion;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint64_t frame_count = 0;
  std::uint8_t bit_depth = 1;

  [[nodiscard]] std::size_t row_stride() const noexcept {
    return bit_depth == 1 ? (static_cast<std::size_t>(width) + 7) / 8 : width;
  }
  [[nodiscard]] std::size_t frame_stride() const noexcept { return row_stride() * height; }
  [[nodiscard]] std::uint64_t payload_size() const noexcept { return frame_count * frame_stride(); }

  bool operator==(const FrameFileHeader&) const = default;
};

std::array<std::uint8_t, FrameFileHeader::kSize> encode_header(const FrameFileHeader& header);
/// Throws IoError (MagicMismatch / Format) for invalid headers.
FrameFileHeader decode_header(std::span<const std::uint8_t> bytes);

/// Encodes a frame into `out` (frame_stride bytes). The frame's bit depth must
/// match `bit_depth`.
void pack_frame(const FrameBuffer& frame, int bit_depth, std::span<std::uint8_t> out);
void unpack_frame(std::span<const std::uint8_t> in, FrameBuffer& frame);

/// Appends ROI indices of set pixels of a packed 1-bit frame straight from the
/// payload bytes (no unpacking).
void collect_active_roi_packed(std::span<const std::uint8_t> packed, const SensorGeometry& geometry,
                               std::vector<std::uint32_t>& out);

/// Sequential SPDF writer. The frame count is patched into the header on close().
class SpdfWriter {
 public:
  SpdfWriter(const std::filesystem::path& path, int width, int height, int bit_depth);
  ~SpdfWriter();
  SpdfWriter(const SpdfWriter&) = delete;
  SpdfWriter& operator=(const SpdfWriter&) = delete;

  void write(const FrameBuffer& frame);
  void close();
  [[nodiscard]] std::uint64_t frames_written() const noexcept { return header_.frame_count; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  FrameFileHeader header_;
  std::vector<std::uint8_t> scratch_;
  bool closed_ = false;
};

/// Sequential SPDF reader; holds one frame of payload at a time. Several
/// readers may open the same file.
class SpdfReader {
 public:
  /// Frames get SensorGeometry::centered(width, height).
  explicit SpdfReader(const std::filesystem::path& path);
  /// Frames get `geometry`, whose dimensions must match the file.
  SpdfReader(const std::filesystem::path& path, const SensorGeometry& geometry);

  [[nodiscard]] const FrameFileHeader& header() const noexcept { return header_; }
  [[nodiscard]] const SensorGeometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] std::uint64_t position() const noexcept { return next_; }

  /// Positions the reader so that the next frame read is `frame_index`.
  void seek(std::uint64_t frame_index);
  /// Reads the next frame into `frame` (bit depth must match); false at end.
  bool next(FrameBuffer& frame);
  /// Reads the next frame's raw payload; false at end.
  bool next_raw(std::span<const std::uint8_t>& payload);
  [[nodiscard]] FrameBuffer make_frame() const;

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  FrameFileHeader header_;
  SensorGeometry geometry_;
  std::vector<std::uint8_t> scratch_;
  std::uint64_t next_ = 0;
};

void write_stream(const std::filesystem::path& path, std::span<const FrameBuffer> frames,
                  int width, int height, int bit_depth);
std::vector<FrameBuffer> read_stream(const std::filesystem::path& path);

}  // namespace spadcorr
