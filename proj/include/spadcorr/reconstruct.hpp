#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spadcorr/accumulator.hpp"
#include "spadcorr/hot_pixels.hpp"

namespace spadcorr {

struct ReconstructOptions {
  AccumulatorOptions accumulator;
  /// Chunks accumulated concurrently; each chunk is primed with the frame
  /// before it and merged in order, so the result does not depend on this.
  unsigned workers = 1;
  std::uint64_t chunk_frames = 16384;
  /// Applied to every frame before accumulation (8-bit input is always clamped).
  std::optional<HotPixelMap> hot_pixels;
  /// Frame geometry; defaults to the centred geometry of the file.
  std::optional<SensorGeometry> geometry;
  /// Prefix lengths at which the checkpoint callback fires.
  std::vector<std::uint64_t> checkpoints;
  /// Stop after this many frames.
  std::optional<std::uint64_t> max_frames;
};

using CheckpointSink = std::function<void(std::uint64_t frames, const JpdAccumulator& prefix)>;

/// Accumulates an SPDF file. Throws ResourceError for FULL mode beyond the
/// memory budget.
JpdAccumulator reconstruct_file(const std::filesystem::path& path, const ReconstructOptions& options,
                                const CheckpointSink& on_checkpoint = {});

/// Single-pass accumulation of in-memory frames (preprocessed with `hot_pixels`
/// when given).
JpdAccumulator accumulate_frames(std::span<const FrameBuffer> frames, const AccumulatorOptions& options,
                                 const HotPixelMap* hot_pixels = nullptr);

}  // namespace spadcorr
